"""Compositional causal reasoning evaluation: graphs, SCMs, estimands,
task generation, reasoners and the error/taxonomy evaluator."""

__version__ = "0.1.0"
