"""Extract transformer embeddings and log-probs into portable files."""

from .config import ExtractionConfig
from .errors import AdapterError, ConfigError, InputError, ModelError
from .extraction import dump_logprobs, extract, load_model
from .files import read_texts_jsonl, write_embedding_file, write_logprob_file

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "ConfigError",
    "ExtractionConfig",
    "InputError",
    "ModelError",
    "__version__",
    "dump_logprobs",
    "extract",
    "load_model",
    "read_texts_jsonl",
    "write_embedding_file",
    "write_logprob_file",
]
