"""Extraction settings shared by the embedding and log-prob pipelines."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

POOLING_MODES = ("last", "mean")


@dataclass(frozen=True)
class ExtractionConfig:
    """How to run the language model over a batch of texts.

    ``max_length`` caps the number of tokens kept per text (longer texts
    are truncated, not windowed).  ``pooling`` selects the vector taken
    from the final hidden layer: the state at the last non-padding token
    (``"last"``, the default) or the mean over all non-padding tokens
    (``"mean"``).
    """

    model_name: str
    max_length: int = 1024
    batch_size: int = 8
    device: str = "cpu"
    pooling: str = "last"

    def __post_init__(self) -> None:
        if not self.model_name:
            raise ConfigError("model_name must be a non-empty identifier")
        if self.max_length < 1:
            raise ConfigError(f"max_length must be at least 1, got {self.max_length}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.pooling not in POOLING_MODES:
            raise ConfigError(
                f"pooling must be one of {POOLING_MODES}, got {self.pooling!r}"
            )
