"""Forecast models: univariate LSTM (case 1) and attention LSTM (case 2).

Case 1 feeds DLR-history windows through an LSTM and a dense head. Case 2
feeds six-feature windows through the same LSTM cell, adds temporal
attention over the hidden states (query from the final state, keys/values
from all of them), and the head reads the concatenated
[final hidden state; attention context].

Training is mini-batch Adam on normalized-target MSE with the last tenth of
the training windows held out for early stopping. Everything is seeded and
single-threaded: identical (seed, data, config) reproduce the trained model
bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import nn
from .dataset import FEATURE_ORDER, Normalizer, WindowedDataset
from .errors import DataError, NumericalError
from .rng import SplitMix64

MODEL_FILE_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    """Architecture and training hyperparameters for one case."""

    case_tag: int
    window_len: int = 16
    hidden_dim: int = 32
    epochs: int = 200
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 42
    early_stop_patience: int = 20
    shuffle: bool = False  # seeded batch-order shuffle; off for chronological batches

    def __post_init__(self):
        if self.case_tag not in (1, 2):
            raise ValueError(f"case_tag must be 1 or 2, got {self.case_tag}")
        if self.window_len < 2:
            raise ValueError(f"window_len must be >= 2, got {self.window_len}")
        if self.hidden_dim < 1:
            raise ValueError(f"hidden_dim must be >= 1, got {self.hidden_dim}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.early_stop_patience < 1:
            raise ValueError(
                f"early_stop_patience must be >= 1, got {self.early_stop_patience}")

    @property
    def input_dim(self) -> int:
        return 1 if self.case_tag == 1 else len(FEATURE_ORDER)

    @property
    def head_width(self) -> int:
        # case 2 concatenates [h_last; context], both H wide
        return self.hidden_dim if self.case_tag == 1 else 2 * self.hidden_dim


@dataclass
class Model:
    """A built (and possibly trained) forecaster."""

    config: ModelConfig
    lstm: nn.LstmParams
    attention: nn.AttentionParams | None
    head_w: np.ndarray
    head_b: np.ndarray
    normalizer: Normalizer | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return (FEATURE_ORDER[0],) if self.config.case_tag == 1 else FEATURE_ORDER

    def get_params(self) -> dict[str, np.ndarray]:
        params = {
            "lstm.w_i": self.lstm.w_i, "lstm.w_f": self.lstm.w_f,
            "lstm.w_o": self.lstm.w_o, "lstm.w_g": self.lstm.w_g,
            "lstm.b_i": self.lstm.b_i, "lstm.b_f": self.lstm.b_f,
            "lstm.b_o": self.lstm.b_o, "lstm.b_g": self.lstm.b_g,
        }
        if self.attention is not None:
            params.update({"att.w_q": self.attention.w_q,
                           "att.w_k": self.attention.w_k,
                           "att.w_v": self.attention.w_v})
        params["head.w"] = self.head_w
        params["head.b"] = self.head_b
        return params

    def set_params(self, params: dict[str, np.ndarray]) -> None:
        self.lstm.w_i, self.lstm.w_f = params["lstm.w_i"], params["lstm.w_f"]
        self.lstm.w_o, self.lstm.w_g = params["lstm.w_o"], params["lstm.w_g"]
        self.lstm.b_i, self.lstm.b_f = params["lstm.b_i"], params["lstm.b_f"]
        self.lstm.b_o, self.lstm.b_g = params["lstm.b_o"], params["lstm.b_g"]
        if self.attention is not None:
            self.attention.w_q = params["att.w_q"]
            self.attention.w_k = params["att.w_k"]
            self.attention.w_v = params["att.w_v"]
        self.head_w, self.head_b = params["head.w"], params["head.b"]


@dataclass
class TrainReport:
    """Per-epoch loss history plus bookkeeping from one train() call."""

    epochs_run: int
    train_mse: list[float]
    val_mse: list[float]
    best_epoch: int | None
    wall_time_s: float


def build_model(cfg: ModelConfig, normalizer: Normalizer | None = None) -> Model:
    """Initialize all weights from the seeded generator; deterministic."""
    rng = SplitMix64(cfg.seed)
    lstm = nn.lstm_init(cfg.input_dim, cfg.hidden_dim, rng)
    attention = None
    if cfg.case_tag == 2:
        attention = nn.attention_init(cfg.hidden_dim, cfg.hidden_dim,
                                      cfg.hidden_dim, rng)
    head_w, head_b = nn.dense_init(cfg.head_width, rng)
    return Model(config=cfg, lstm=lstm, attention=attention,
                 head_w=head_w, head_b=head_b, normalizer=normalizer)


def forward_batch(model: Model, windows: np.ndarray):
    """Normalized predictions for a (B, n, d) stack of windows.

    Returns (preds (B,), tapes) where tapes carry everything backward_batch
    needs.
    """
    windows = np.asarray(windows, dtype=np.float64)
    cfg = model.config
    if windows.ndim != 3 or windows.shape[1] != cfg.window_len \
            or windows.shape[2] != cfg.input_dim:
        raise ValueError(
            f"window stack shape {windows.shape} does not match case "
            f"{cfg.case_tag} (n={cfg.window_len}, d={cfg.input_dim})")
    h_seq, h_last, lstm_tape = nn.lstm_forward_batch(windows, model.lstm)
    att_tape = None
    if cfg.case_tag == 2:
        context, att_tape = nn.attention_forward_batch(h_seq, h_last, model.attention)
        feat = np.concatenate([h_last, context], axis=1)
    else:
        feat = h_last
    preds = (feat @ model.head_w).ravel() + model.head_b[0]
    return preds, (lstm_tape, att_tape, feat)


def backward_batch(model: Model, tapes, d_preds: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of the batch loss w.r.t. every parameter."""
    lstm_tape, att_tape, feat = tapes
    cfg = model.config
    hidden = cfg.hidden_dim
    d_preds = np.asarray(d_preds, dtype=np.float64).reshape(-1, 1)

    grads = {"head.w": feat.T @ d_preds,
             "head.b": np.array([d_preds.sum()])}
    d_feat = d_preds @ model.head_w.T  # (B, head_width)

    if cfg.case_tag == 2:
        d_h_last = d_feat[:, :hidden]
        d_context = d_feat[:, hidden:]
        d_h_seq, d_h_last_att, att_grads = nn.attention_backward_batch(
            d_context, att_tape, model.attention)
        d_h_last = d_h_last + d_h_last_att
        for key, g in att_grads.items():
            grads[f"att.{key}"] = g
    else:
        d_h_last = d_feat
        d_h_seq = np.zeros_like(lstm_tape.h)

    _, lstm_grads = nn.lstm_backward_batch(d_h_seq, d_h_last, lstm_tape, model.lstm)
    for key, g in lstm_grads.items():
        grads[f"lstm.{key}"] = g
    return grads


def predict(model: Model, window: np.ndarray) -> float:
    """Forecast in amps for one normalized window."""
    if model.normalizer is None:
        raise ValueError("model has no normalizer; train it or attach one")
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (model.config.window_len, model.config.input_dim):
        raise ValueError(
            f"window shape {window.shape} does not match case "
            f"{model.config.case_tag} (n={model.config.window_len}, "
            f"d={model.config.input_dim})")
    preds, _ = forward_batch(model, window[None, :, :])
    return float(model.normalizer.denormalize_dlr(preds[0]))


def _dataset_fingerprint(ds: WindowedDataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ds.inputs).tobytes())
    h.update(np.ascontiguousarray(ds.targets).tobytes())
    return h.hexdigest()


def _mean_mse(model: Model, inputs: np.ndarray, targets: np.ndarray,
              chunk: int = 512) -> float:
    sse = 0.0
    for start in range(0, len(targets), chunk):
        preds, _ = forward_batch(model, inputs[start:start + chunk])
        diff = preds - targets[start:start + chunk]
        sse += float(diff @ diff)
    return sse / len(targets)


def train(model: Model, train_ds: WindowedDataset, cfg: ModelConfig):
    """Mini-batch Adam on normalized-target MSE; returns (model, report).

    The last tenth of the windows (chronologically) is held out as the
    validation slice for early stopping; the returned parameters are the
    best-validation snapshot. With fewer than ten windows there is no
    holdout and training simply runs all epochs.
    """
    if train_ds.case_tag != cfg.case_tag or train_ds.case_tag != model.config.case_tag:
        raise ValueError(f"case mismatch: model {model.config.case_tag}, "
                         f"dataset {train_ds.case_tag}, cfg {cfg.case_tag}")
    if train_ds.window_len != cfg.window_len:
        raise ValueError(f"window mismatch: dataset {train_ds.window_len}, "
                         f"cfg {cfg.window_len}")
    if len(train_ds) == 0:
        raise ValueError("empty training dataset")

    started = time.perf_counter()
    model.normalizer = train_ds.normalizer

    n_total = len(train_ds)
    n_val = n_total // 10
    fit_inputs = train_ds.inputs[:n_total - n_val]
    fit_targets = train_ds.targets[:n_total - n_val]
    val_inputs = train_ds.inputs[n_total - n_val:]
    val_targets = train_ds.targets[n_total - n_val:]

    n_fit = len(fit_targets)
    batch_starts = list(range(0, n_fit, cfg.batch_size))
    shuffle_rng = SplitMix64(cfg.seed ^ 0xB7E151628AED2A6B) if cfg.shuffle else None

    params = {k: v.copy() for k, v in model.get_params().items()}
    model.set_params(params)
    state = nn.AdamState.zeros_like(params)
    step = 0

    train_curve: list[float] = []
    val_curve: list[float] = []
    best_val = math.inf
    best_epoch: int | None = None
    best_params: dict[str, np.ndarray] | None = None
    bad_epochs = 0
    epochs_run = 0

    for epoch in range(1, cfg.epochs + 1):
        if shuffle_rng is not None:
            # seeded Fisher-Yates over window indices: batches become unbiased
            # draws instead of contiguous same-time-of-day runs
            perm = np.arange(n_fit)
            for i in range(n_fit - 1, 0, -1):
                j = shuffle_rng.next_u64() % (i + 1)
                perm[i], perm[j] = perm[j], perm[i]
            batches = [perm[s:s + cfg.batch_size] for s in batch_starts]
        else:
            batches = [slice(s, s + cfg.batch_size) for s in batch_starts]

        sse = 0.0
        for start, sel in zip(batch_starts, batches):
            xb = fit_inputs[sel]
            yb = fit_targets[sel]
            preds, tapes = forward_batch(model, xb)
            loss, d_preds = nn.mse_loss(preds, yb)
            if not math.isfinite(loss):
                raise NumericalError(
                    f"non-finite training loss at epoch {epoch}, "
                    f"batch starting at window {start}")
            sse += loss * len(yb)
            grads = backward_batch(model, tapes, d_preds)
            step += 1
            params, state = nn.adam_step(params, grads, state, step,
                                         lr=cfg.learning_rate)
            model.set_params(params)

        epochs_run = epoch
        train_curve.append(sse / len(fit_targets))

        if n_val > 0:
            val_mse = _mean_mse(model, val_inputs, val_targets)
            if not math.isfinite(val_mse):
                raise NumericalError(f"non-finite validation loss at epoch {epoch}")
            val_curve.append(val_mse)
            if val_mse < best_val:
                best_val = val_mse
                best_epoch = epoch
                best_params = {k: v.copy() for k, v in params.items()}
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs >= cfg.early_stop_patience:
                    break

    if best_params is not None:
        model.set_params(best_params)

    model.metadata = dict(model.metadata)
    model.metadata.update({
        "epochs_run": epochs_run,
        "final_train_mse": train_curve[-1],
        "best_val_mse": best_val if n_val > 0 else None,
        "data_sha256": _dataset_fingerprint(train_ds),
    })
    report = TrainReport(epochs_run=epochs_run, train_mse=train_curve,
                         val_mse=val_curve, best_epoch=best_epoch,
                         wall_time_s=time.perf_counter() - started)
    return model, report


# ── persistence ─────────────────────────────────────────────────────────

def save_model(model: Model, path: str) -> None:
    """Write the versioned model document (JSON text, exact float round-trip)."""
    if model.normalizer is None:
        raise ValueError("refusing to save a model without a normalizer")
    weights: dict = {
        "lstm": {k: getattr(model.lstm, k).tolist()
                 for k in ("w_i", "w_f", "w_o", "w_g", "b_i", "b_f", "b_o", "b_g")},
        "head": {"w": model.head_w.tolist(), "b": model.head_b.tolist()},
    }
    if model.attention is not None:
        weights["attention"] = {k: getattr(model.attention, k).tolist()
                                for k in ("w_q", "w_k", "w_v")}
    doc = {
        "version": MODEL_FILE_VERSION,
        "case": model.config.case_tag,
        "config": asdict(model.config),
        "feature_names": list(model.feature_names),
        "normalizer": model.normalizer.to_dict(),
        "weights": weights,
        "metadata": model.metadata,
    }
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, indent=1, allow_nan=False)
        fh.write("\n")


def _as_array(nested, shape: tuple[int, ...], what: str) -> np.ndarray:
    arr = np.asarray(nested, dtype=np.float64)
    if arr.shape != shape:
        raise DataError(f"model file: {what} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"model file: non-finite values in {what}")
    return arr


def load_model(path: str) -> Model:
    """Parse and validate a model document; inverse of save_model."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read model file {path!r}: {exc}") from exc
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except ValueError as exc:
        raise DataError(f"model file {path!r} is corrupt or truncated: {exc}") from exc

    version = doc.get("version")
    if version != MODEL_FILE_VERSION:
        raise DataError(f"unsupported model file version {version!r} "
                        f"(this build reads version {MODEL_FILE_VERSION})")
    try:
        cfg = ModelConfig(**doc["config"])
        if cfg.case_tag != doc["case"]:
            raise DataError("model file: case field disagrees with config")
        norm = Normalizer.from_dict(doc["normalizer"])
        lw = doc["weights"]["lstm"]
        gate_shape = (cfg.input_dim + cfg.hidden_dim, cfg.hidden_dim)
        bias_shape = (cfg.hidden_dim,)
        lstm = nn.LstmParams(
            w_i=_as_array(lw["w_i"], gate_shape, "lstm.w_i"),
            w_f=_as_array(lw["w_f"], gate_shape, "lstm.w_f"),
            w_o=_as_array(lw["w_o"], gate_shape, "lstm.w_o"),
            w_g=_as_array(lw["w_g"], gate_shape, "lstm.w_g"),
            b_i=_as_array(lw["b_i"], bias_shape, "lstm.b_i"),
            b_f=_as_array(lw["b_f"], bias_shape, "lstm.b_f"),
            b_o=_as_array(lw["b_o"], bias_shape, "lstm.b_o"),
            b_g=_as_array(lw["b_g"], bias_shape, "lstm.b_g"))
        attention = None
        if cfg.case_tag == 2:
            aw = doc["weights"]["attention"]
            proj = (cfg.hidden_dim, cfg.hidden_dim)
            attention = nn.AttentionParams(
                w_q=_as_array(aw["w_q"], proj, "attention.w_q"),
                w_k=_as_array(aw["w_k"], proj, "attention.w_k"),
                w_v=_as_array(aw["w_v"], proj, "attention.w_v"))
        head_w = _as_array(doc["weights"]["head"]["w"], (cfg.head_width, 1), "head.w")
        head_b = _as_array(doc["weights"]["head"]["b"], (1,), "head.b")
        expected_features = [FEATURE_ORDER[0]] if cfg.case_tag == 1 else list(FEATURE_ORDER)
        if doc["feature_names"] != expected_features:
            raise DataError(f"model file: unexpected feature_names "
                            f"{doc['feature_names']!r}")
        metadata = dict(doc.get("metadata", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"model file {path!r} is structurally invalid: {exc}") from exc

    return Model(config=cfg, lstm=lstm, attention=attention, head_w=head_w,
                 head_b=head_b, normalizer=norm, metadata=metadata)


def _reject_constant(name: str):
    raise ValueError(f"non-finite constant {name!r} in model file")
