"""Run a pretrained causal language model over texts and persist the results.

``extract`` writes one embedding row per non-empty text: the final
hidden layer either at the last non-padding token or mean-pooled over
the text.  ``dump_logprobs`` writes the total log-likelihood (nats) and
token count per text.  Both skip texts that tokenize to nothing and log
the skipped index instead of failing the whole run.
"""

from __future__ import annotations

import logging
import os

import numpy as np
import numpy.typing as npt
import torch

from .config import ExtractionConfig
from .errors import ConfigError, InputError, ModelError
from .files import write_embedding_file, write_logprob_file

logger = logging.getLogger("embed_adapter")


def load_model(config: ExtractionConfig):
    """Load tokenizer and model named by ``config`` in inference mode."""
    from transformers import AutoModelForCausalLM, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(config.model_name)
        model = AutoModelForCausalLM.from_pretrained(config.model_name)
    except Exception as exc:  # transformers raises a zoo of types here
        raise ModelError(f"cannot load model {config.model_name!r}: {exc}") from exc
    try:
        device = torch.device(config.device)
        model = model.to(device)
    except (RuntimeError, ValueError) as exc:
        raise ConfigError(f"cannot use device {config.device!r}: {exc}") from exc
    model.eval()
    if tokenizer.pad_token_id is None:
        for candidate in (tokenizer.eos_token, tokenizer.bos_token, tokenizer.unk_token):
            if candidate is not None:
                tokenizer.pad_token = candidate
                break
        else:
            raise ModelError(
                f"tokenizer of {config.model_name!r} has no token usable for padding"
            )
    return tokenizer, model


def _position_limit(model) -> int | None:
    limit = getattr(model.config, "max_position_embeddings", None)
    return int(limit) if limit else None


def _encode_batch(tokenizer, texts: list[str], max_length: int, device):
    encoded = tokenizer(
        texts,
        return_tensors="pt",
        padding=True,
        truncation=True,
        max_length=max_length,
    )
    ids = encoded["input_ids"].to(device)
    mask = encoded["attention_mask"].to(device)
    return ids, mask


def _batches(texts: list[str], batch_size: int):
    for start in range(0, len(texts), batch_size):
        yield start, texts[start : start + batch_size]


def extract(
    texts: list[str], config: ExtractionConfig, out_path: str | os.PathLike
) -> npt.NDArray[np.float32]:
    """Embed every non-empty text and write the binary embedding file.

    Returns the float32 rows that were written, in input order (minus
    skipped texts), so callers can cross-check the file contents.
    """
    if not texts:
        raise InputError("texts must be a non-empty list")
    tokenizer, model = load_model(config)
    device = next(model.parameters()).device
    limit = _position_limit(model)
    max_length = min(config.max_length, limit) if limit else config.max_length

    collected: list[np.ndarray] = []
    with torch.inference_mode():
        for start, batch in _batches(texts, config.batch_size):
            ids, mask = _encode_batch(tokenizer, batch, max_length, device)
            lengths = mask.sum(dim=1)
            keep = lengths > 0
            for offset in torch.nonzero(~keep).flatten().tolist():
                logger.warning("skipping empty text at index %d", start + offset)
            if not bool(keep.any()):
                continue
            ids, mask, lengths = ids[keep], mask[keep], lengths[keep]
            output = model(input_ids=ids, attention_mask=mask, output_hidden_states=True)
            hidden = output.hidden_states[-1]
            if config.pooling == "last":
                rows = hidden[torch.arange(hidden.shape[0], device=device), lengths - 1]
            else:
                weights = mask.unsqueeze(-1).to(hidden.dtype)
                rows = (hidden * weights).sum(dim=1) / lengths.unsqueeze(-1)
            collected.append(rows.cpu().numpy().astype(np.float32))

    if not collected:
        raise InputError("every text was empty after tokenization; nothing to embed")
    stacked = np.concatenate(collected, axis=0)
    write_embedding_file(stacked, out_path)
    return stacked


def dump_logprobs(
    texts: list[str], config: ExtractionConfig, out_path: str | os.PathLike
) -> list[tuple[float, int]]:
    """Score every non-empty text and write the log-prob CSV.

    The model's beginning-of-sequence token (falling back to the
    end-of-sequence token) is prepended as conditioning context so that
    all tokens of the text proper are scored and ``n_tokens`` equals the
    tokenizer's count.  Models with neither special token fall back to
    leaving the first token unscored (``n_tokens`` = count - 1), which
    is logged once.
    """
    if not texts:
        raise InputError("texts must be a non-empty list")
    tokenizer, model = load_model(config)
    device = next(model.parameters()).device
    limit = _position_limit(model)

    context_id = tokenizer.bos_token_id
    if context_id is None:
        context_id = tokenizer.eos_token_id
    if context_id is None:
        logger.warning(
            "model %s has no bos/eos token: the first token of each text "
            "goes unscored and n_tokens drops by one",
            config.model_name,
        )
        max_length = min(config.max_length, limit) if limit else config.max_length
    else:
        # leave room for the prepended conditioning token
        max_length = min(config.max_length, limit - 1) if limit else config.max_length

    records: list[tuple[float, int]] = []
    with torch.inference_mode():
        for start, batch in _batches(texts, config.batch_size):
            ids, mask = _encode_batch(tokenizer, batch, max_length, device)
            lengths = mask.sum(dim=1)
            min_tokens = 1 if context_id is not None else 2
            keep = lengths >= min_tokens
            for offset in torch.nonzero(~keep).flatten().tolist():
                logger.warning("skipping unscoreable text at index %d", start + offset)
            if not bool(keep.any()):
                continue
            ids, mask, lengths = ids[keep], mask[keep], lengths[keep]

            if context_id is not None:
                n_rows = ids.shape[0]
                context = torch.full((n_rows, 1), context_id, dtype=ids.dtype, device=device)
                run_ids = torch.cat([context, ids], dim=1)
                run_mask = torch.cat([torch.ones_like(context), mask], dim=1)
                targets, target_mask, counts = ids, mask, lengths
            else:
                run_ids, run_mask = ids, mask
                targets, target_mask = ids[:, 1:], mask[:, 1:]
                counts = lengths - 1

            logits = model(input_ids=run_ids, attention_mask=run_mask).logits
            log_probs = torch.log_softmax(logits[:, :-1, :], dim=-1)
            token_scores = log_probs.gather(2, targets.unsqueeze(-1).long()).squeeze(-1)
            totals = (token_scores.double() * target_mask.double()).sum(dim=1)
            for total, count in zip(totals.tolist(), counts.tolist()):
                records.append((float(total), int(count)))

    if not records:
        raise InputError("every text was empty after tokenization; nothing to score")
    write_logprob_file(records, out_path)
    return records
