"""Deterministic CSV and markdown emission for convergence reports.

The CSV schema is the interchange format::

    example,alpha,scheme,m,tau,t,err_l2,err_energy,rate_l2,rate_energy,theory_l2,theory_energy

Floats are written in shortest round-trip decimal form; absent rates and
theory annotations are empty fields.  Identical report objects serialize to
identical bytes, which the golden-file test relies on.
"""

from __future__ import annotations

import io

from .experiments import ConvergenceReport, ReportRow

__all__ = ["CSV_HEADER", "emit_csv", "parse_csv", "emit_markdown", "write_report"]

CSV_HEADER = ("example,alpha,scheme,m,tau,t,"
              "err_l2,err_energy,rate_l2,rate_energy,theory_l2,theory_energy")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def emit_csv(report: ConvergenceReport) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in report.rows:
        out.write(",".join(_fmt(v) for v in (
            r.example, r.alpha, r.scheme, r.m, r.tau, r.t,
            r.err_l2, r.err_energy, r.rate_l2, r.rate_energy,
            r.theory_l2, r.theory_energy)) + "\n")
    return out.getvalue()


def parse_csv(text: str) -> tuple[ReportRow, ...]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or unexpected CSV header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 12:
            raise ValueError(f"malformed CSV row: {ln!r}")
        opt = [None if p == "" else float(p) for p in parts[8:12]]
        rows.append(ReportRow(
            example=parts[0], alpha=float(parts[1]), scheme=parts[2],
            m=int(parts[3]), tau=float(parts[4]), t=float(parts[5]),
            err_l2=float(parts[6]), err_energy=float(parts[7]),
            rate_l2=opt[0], rate_energy=opt[1],
            theory_l2=opt[2], theory_energy=opt[3]))
    return tuple(rows)


def _theory_label(value: float | None) -> str:
    return "( - - )" if value is None else f"({value:.2f})"


def _ratio_cell(mean_rate, theory, superconvergent: bool) -> str:
    if mean_rate is None:
        return "--"
    tag = " superconvergent" if superconvergent else ""
    return f"$\\approx$ {mean_rate:.2f} {_theory_label(theory)}{tag}"


def emit_markdown(report: ConvergenceReport) -> str:
    """Tables in the familiar layout: one column per refinement level, one
    row per (alpha, norm), trailing ratio column with the theoretical rate in
    brackets (`( - - )` when no theory applies)."""
    out = io.StringIO()
    norm_note = "normalized by ||v||" if report.normalized else "unnormalized"
    out.write(f"# {report.kind} study, example ({report.example}), "
              f"scheme {report.scheme}, {norm_note}\n")
    times = sorted({r.t for r in report.rows})
    refine_in_time = report.kind == "temporal"
    for t in times:
        trows = [r for r in report.rows if r.t == t]
        levels = sorted({r.tau for r in trows}) if refine_in_time \
            else sorted({r.m for r in trows})
        head = [f"tau=1/{round(1/v)}" if refine_in_time else f"h=1/{v}"
                for v in levels]
        out.write(f"\n## t = {t:g}\n\n")
        out.write("| alpha | norm | " + " | ".join(head) + " | ratio |\n")
        out.write("|" + "---|" * (len(head) + 3) + "\n")
        alphas = []
        for r in trows:
            if r.alpha not in alphas:
                alphas.append(r.alpha)
        for alpha in alphas:
            group = [r for r in trows if r.alpha == alpha]
            group.sort(key=lambda r: r.tau if refine_in_time else r.m)
            summ = next(s for s in report.summaries
                        if s.alpha == alpha and s.t == t)
            l2_cells = " | ".join(f"{r.err_l2:.2e}" for r in group)
            en_cells = " | ".join(f"{r.err_energy:.2e}" for r in group)
            out.write(f"| {alpha:g} | L2 | {l2_cells} | "
                      f"{_ratio_cell(summ.mean_rate_l2, summ.theory_l2, summ.superconvergent_l2)} |\n")
            out.write(f"| {alpha:g} | energy | {en_cells} | "
                      f"{_ratio_cell(summ.mean_rate_energy, summ.theory_energy, summ.superconvergent_energy)} |\n")
    return out.getvalue()


def write_report(report: ConvergenceReport, path, fmt: str = "csv") -> None:
    if fmt == "csv":
        text = emit_csv(report)
    elif fmt == "markdown":
        text = emit_markdown(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
