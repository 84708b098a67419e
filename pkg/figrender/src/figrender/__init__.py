"""Figure rendering for simulation-suite CSV outputs."""

from .render import (
    KINDS,
    RenderError,
    irregularity_figure,
    rank_bias_figure,
    read_table,
    render,
    tau_figure,
)

__all__ = [
    "KINDS",
    "RenderError",
    "irregularity_figure",
    "rank_bias_figure",
    "read_table",
    "render",
    "tau_figure",
]
