"""Canned study configurations.

``tiny`` is the golden-file fixture: a seconds-long spatial sweep whose CSV
output is byte-stable.  ``paper`` is the full reproduction set: spatial sweeps
for all four examples, the temporal sweeps on the fixed fine mesh for all
three schemes, and the small-time sweeps for the nonsmooth data.
"""

from __future__ import annotations

from .experiments import DEFAULT_TAU_REF, ExperimentConfig

__all__ = ["tiny_config", "paper_studies"]

ALPHAS = (1.25, 1.5, 1.75)
SPATIAL_MESHES = (16, 32, 64, 128, 256, 512)
SMALL_TIMES = (0.001, 0.005, 0.01, 0.1)


def tiny_config(seed: int = 0) -> ExperimentConfig:
    return ExperimentConfig(example="a", alphas=(1.5,), scheme="DampedCN",
                            m_list=(8, 16), m_ref=64, tau=2e-4, times=(1.0,),
                            init="l2", normalize=True, seed=seed)


def paper_studies(seed: int = 0) -> list[tuple[str, str, ExperimentConfig]]:
    """(name, study kind, config) for every table-style run."""
    studies: list[tuple[str, str, ExperimentConfig]] = []
    for example in ("a", "b1", "b2", "c"):
        studies.append((
            f"spatial_{example}", "spatial",
            ExperimentConfig(example=example, alphas=ALPHAS, scheme="DampedCN",
                             m_list=SPATIAL_MESHES, m_ref=2048, tau=2e-4,
                             times=(1.0,), init="l2", seed=seed)))
    for scheme in ("BE", "CN", "DampedCN"):
        studies.append((
            f"temporal_a_{scheme.lower()}", "temporal",
            ExperimentConfig(example="a", alphas=ALPHAS, scheme=scheme,
                             m_list=(1024,), tau_ref=DEFAULT_TAU_REF,
                             times=(1.0,), init="l2", seed=seed)))
    for example in ("b1", "b2"):
        studies.append((
            f"smalltime_{example}", "smalltime",
            ExperimentConfig(example=example, alphas=(1.5,), scheme="DampedCN",
                             m_list=SPATIAL_MESHES, m_ref=2048, tau=2e-4,
                             times=SMALL_TIMES, init="l2", seed=seed)))
    return studies
