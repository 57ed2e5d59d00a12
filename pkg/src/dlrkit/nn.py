"""Hand-written neural network core: LSTM, temporal attention, Adam.

Everything is float64 numpy with exact analytic backward passes. Batched
entry points (``*_batch``) process B sequences at once; the single-sequence
functions are thin B=1 wrappers, so training, prediction and the gradient
checker all exercise the same code path.

Forward passes return an explicit tape of cached intermediates; backward
passes consume the tape and reject upstream gradients whose shapes do not
match it. A central finite-difference checker lives here too, used only as
a test oracle, never in production paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import SplitMix64


def _sigmoid(x):
    # piecewise form avoids exp overflow on large |x|
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax_rows(m: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax: subtract the row max before exponentiating."""
    m = np.asarray(m, dtype=np.float64)
    shifted = m - m.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


# ── parameter containers ────────────────────────────────────────────────

@dataclass
class LstmParams:
    """Gate weights over the concatenated [x_t, h_{t-1}] input.

    Each w_* is (d_in + H) x H, each b_* is (H,).
    """

    w_i: np.ndarray
    w_f: np.ndarray
    w_o: np.ndarray
    w_g: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_o: np.ndarray
    b_g: np.ndarray

    @property
    def hidden_dim(self) -> int:
        return self.w_i.shape[1]

    @property
    def input_dim(self) -> int:
        return self.w_i.shape[0] - self.hidden_dim


@dataclass
class AttentionParams:
    """Projections for scaled dot-product attention over hidden states."""

    w_q: np.ndarray  # H x d_k
    w_k: np.ndarray  # H x d_k
    w_v: np.ndarray  # H x d_v

    @property
    def d_k(self) -> int:
        return self.w_q.shape[1]

    @property
    def d_v(self) -> int:
        return self.w_v.shape[1]


def _uniform_matrix(rng: SplitMix64, rows: int, cols: int, scale: float) -> np.ndarray:
    # row-major fill keeps the draw order part of the documented init policy
    out = np.empty((rows, cols), dtype=np.float64)
    for r in range(rows):
        for c in range(cols):
            out[r, c] = rng.uniform_in(-scale, scale)
    return out


def lstm_init(d_in: int, hidden: int, rng: SplitMix64) -> LstmParams:
    """uniform(-s, s) with s = 1/sqrt(fan_in); forget bias starts at 1."""
    fan_in = d_in + hidden
    s = 1.0 / math.sqrt(fan_in)
    return LstmParams(
        w_i=_uniform_matrix(rng, fan_in, hidden, s),
        w_f=_uniform_matrix(rng, fan_in, hidden, s),
        w_o=_uniform_matrix(rng, fan_in, hidden, s),
        w_g=_uniform_matrix(rng, fan_in, hidden, s),
        b_i=np.zeros(hidden), b_f=np.ones(hidden),
        b_o=np.zeros(hidden), b_g=np.zeros(hidden))


def attention_init(hidden: int, d_k: int, d_v: int, rng: SplitMix64) -> AttentionParams:
    s = 1.0 / math.sqrt(hidden)
    return AttentionParams(
        w_q=_uniform_matrix(rng, hidden, d_k, s),
        w_k=_uniform_matrix(rng, hidden, d_k, s),
        w_v=_uniform_matrix(rng, hidden, d_v, s))


def dense_init(d_in: int, rng: SplitMix64) -> tuple[np.ndarray, np.ndarray]:
    s = 1.0 / math.sqrt(d_in)
    return _uniform_matrix(rng, d_in, 1, s), np.zeros(1)


# ── LSTM forward/backward ───────────────────────────────────────────────

@dataclass
class LstmTape:
    """Cached intermediates from one lstm_forward_batch call."""

    x: np.ndarray        # (B, n, d_in)
    z: np.ndarray        # (B, n, d_in + H) concatenated gate inputs
    gate_i: np.ndarray   # (B, n, H)
    gate_f: np.ndarray
    gate_o: np.ndarray
    gate_g: np.ndarray
    c: np.ndarray        # (B, n, H) cell states
    tanh_c: np.ndarray
    h: np.ndarray        # (B, n, H)


def lstm_forward_batch(x: np.ndarray, p: LstmParams):
    """Run the cell over B sequences; returns (h_seq, h_last, tape)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError(f"expected (B, n, d_in) input, got shape {x.shape}")
    batch, n, d_in = x.shape
    if d_in != p.input_dim:
        raise ValueError(f"input feature dim {d_in} != params input dim {p.input_dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite values in LSTM input")
    hidden = p.hidden_dim

    z = np.empty((batch, n, d_in + hidden))
    gi = np.empty((batch, n, hidden))
    gf = np.empty_like(gi)
    go = np.empty_like(gi)
    gg = np.empty_like(gi)
    cs = np.empty_like(gi)
    tc = np.empty_like(gi)
    hs = np.empty_like(gi)

    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    for t in range(n):
        zt = np.concatenate([x[:, t, :], h], axis=1)
        i_t = _sigmoid(zt @ p.w_i + p.b_i)
        f_t = _sigmoid(zt @ p.w_f + p.b_f)
        o_t = _sigmoid(zt @ p.w_o + p.b_o)
        g_t = np.tanh(zt @ p.w_g + p.b_g)
        c = f_t * c + i_t * g_t
        tc_t = np.tanh(c)
        h = o_t * tc_t
        z[:, t] = zt
        gi[:, t], gf[:, t], go[:, t], gg[:, t] = i_t, f_t, o_t, g_t
        cs[:, t], tc[:, t], hs[:, t] = c, tc_t, h

    tape = LstmTape(x=x, z=z, gate_i=gi, gate_f=gf, gate_o=go, gate_g=gg,
                    c=cs, tanh_c=tc, h=hs)
    return hs, h, tape


def lstm_backward_batch(d_h_seq: np.ndarray, d_h_last: np.ndarray,
                        tape: LstmTape, p: LstmParams):
    """Exact BPTT through the tape; returns (d_x, grads dict)."""
    batch, n, hidden = tape.h.shape
    d_in = p.input_dim
    d_h_seq = np.asarray(d_h_seq, dtype=np.float64)
    d_h_last = np.asarray(d_h_last, dtype=np.float64)
    if d_h_seq.shape != (batch, n, hidden):
        raise ValueError(f"d_h_seq shape {d_h_seq.shape} does not match tape "
                         f"{(batch, n, hidden)}")
    if d_h_last.shape != (batch, hidden):
        raise ValueError(f"d_h_last shape {d_h_last.shape} does not match tape "
                         f"{(batch, hidden)}")

    grads = {"w_i": np.zeros_like(p.w_i), "w_f": np.zeros_like(p.w_f),
             "w_o": np.zeros_like(p.w_o), "w_g": np.zeros_like(p.w_g),
             "b_i": np.zeros_like(p.b_i), "b_f": np.zeros_like(p.b_f),
             "b_o": np.zeros_like(p.b_o), "b_g": np.zeros_like(p.b_g)}
    d_x = np.zeros((batch, n, d_in))

    dh_next = np.zeros((batch, hidden))  # gradient flowing in from step t+1
    dc_next = np.zeros((batch, hidden))
    for t in range(n - 1, -1, -1):
        dh = d_h_seq[:, t] + dh_next
        if t == n - 1:
            dh = dh + d_h_last
        i_t, f_t = tape.gate_i[:, t], tape.gate_f[:, t]
        o_t, g_t = tape.gate_o[:, t], tape.gate_g[:, t]
        tc_t = tape.tanh_c[:, t]
        c_prev = tape.c[:, t - 1] if t > 0 else np.zeros((batch, hidden))

        dc = dc_next + dh * o_t * (1.0 - tc_t ** 2)
        da_o = dh * tc_t * o_t * (1.0 - o_t)
        da_i = dc * g_t * i_t * (1.0 - i_t)
        da_f = dc * c_prev * f_t * (1.0 - f_t)
        da_g = dc * i_t * (1.0 - g_t ** 2)

        zt = tape.z[:, t]
        grads["w_i"] += zt.T @ da_i
        grads["w_f"] += zt.T @ da_f
        grads["w_o"] += zt.T @ da_o
        grads["w_g"] += zt.T @ da_g
        grads["b_i"] += da_i.sum(axis=0)
        grads["b_f"] += da_f.sum(axis=0)
        grads["b_o"] += da_o.sum(axis=0)
        grads["b_g"] += da_g.sum(axis=0)

        dz = da_i @ p.w_i.T + da_f @ p.w_f.T + da_o @ p.w_o.T + da_g @ p.w_g.T
        d_x[:, t] = dz[:, :d_in]
        dh_next = dz[:, d_in:]
        dc_next = dc * f_t

    return d_x, grads


def lstm_forward(x_seq: np.ndarray, p: LstmParams):
    """Single-sequence forward: x_seq is (n, d_in); h_last comes back (1, H)."""
    h_seq, h_last, tape = lstm_forward_batch(np.asarray(x_seq)[None, :, :], p)
    return h_seq[0], h_last, tape


def lstm_backward(d_h_seq: np.ndarray, d_h_last: np.ndarray,
                  tape: LstmTape, p: LstmParams):
    d_h_seq = np.asarray(d_h_seq, dtype=np.float64)
    d_h_last = np.asarray(d_h_last, dtype=np.float64).reshape(1, -1)
    d_x, grads = lstm_backward_batch(d_h_seq[None, :, :], d_h_last, tape, p)
    return d_x[0], grads


# ── scaled dot-product attention ────────────────────────────────────────

@dataclass
class AttentionTape:
    """Cached intermediates from one attention_forward_batch call."""

    h_seq: np.ndarray    # (B, n, H)
    h_last: np.ndarray   # (B, H)
    q: np.ndarray        # (B, d_k)
    k: np.ndarray        # (B, n, d_k)
    v: np.ndarray        # (B, n, d_v)
    weights: np.ndarray  # (B, n) softmax rows


def attention_forward_batch(h_seq: np.ndarray, h_last: np.ndarray,
                            p: AttentionParams):
    """Temporal attention: query from the final state, keys/values from all.

    context = softmax(q k^T / sqrt(d_k)) v, one context row per sequence.
    """
    h_seq = np.asarray(h_seq, dtype=np.float64)
    h_last = np.asarray(h_last, dtype=np.float64)
    if h_seq.ndim != 3 or h_last.ndim != 2 or h_seq.shape[0] != h_last.shape[0] \
            or h_seq.shape[2] != h_last.shape[1]:
        raise ValueError(f"inconsistent shapes: h_seq {h_seq.shape}, h_last {h_last.shape}")
    if h_seq.shape[2] != p.w_q.shape[0]:
        raise ValueError(f"hidden dim {h_seq.shape[2]} != projection rows {p.w_q.shape[0]}")

    q = h_last @ p.w_q                                   # (B, d_k)
    k = h_seq @ p.w_k                                    # (B, n, d_k)
    v = h_seq @ p.w_v                                    # (B, n, d_v)
    scores = np.einsum("bk,bnk->bn", q, k) / math.sqrt(p.d_k)
    weights = softmax_rows(scores)                       # (B, n)
    context = np.einsum("bn,bnv->bv", weights, v)        # (B, d_v)
    tape = AttentionTape(h_seq=h_seq, h_last=h_last, q=q, k=k, v=v, weights=weights)
    return context, tape


def attention_backward_batch(d_context: np.ndarray, tape: AttentionTape,
                             p: AttentionParams):
    """Exact gradients through context, softmax and the 1/sqrt(d_k) scaling."""
    d_context = np.asarray(d_context, dtype=np.float64)
    batch, n, hidden = tape.h_seq.shape
    if d_context.shape != (batch, p.d_v):
        raise ValueError(f"d_context shape {d_context.shape} does not match tape "
                         f"{(batch, p.d_v)}")

    a, q, k, v = tape.weights, tape.q, tape.k, tape.v

    d_v_rows = a[:, :, None] * d_context[:, None, :]          # (B, n, d_v)
    d_a = np.einsum("bv,bnv->bn", d_context, v)
    # softmax Jacobian, row-wise: ds = a * (da - sum(da * a))
    d_s = a * (d_a - np.sum(d_a * a, axis=1, keepdims=True))
    d_s = d_s / math.sqrt(p.d_k)
    d_q = np.einsum("bn,bnk->bk", d_s, k)
    d_k_rows = d_s[:, :, None] * q[:, None, :]                # (B, n, d_k)

    grads = {
        "w_q": tape.h_last.T @ d_q,
        "w_k": tape.h_seq.reshape(batch * n, hidden).T
               @ d_k_rows.reshape(batch * n, p.d_k),
        "w_v": tape.h_seq.reshape(batch * n, hidden).T
               @ d_v_rows.reshape(batch * n, p.d_v),
    }
    d_h_last = d_q @ p.w_q.T
    d_h_seq = d_k_rows @ p.w_k.T + d_v_rows @ p.w_v.T
    return d_h_seq, d_h_last, grads


def attention_forward(h_seq: np.ndarray, h_last: np.ndarray, p: AttentionParams):
    """Single-sequence attention: h_seq (n, H), h_last (1, H) -> (1, d_v)."""
    h_last = np.asarray(h_last, dtype=np.float64).reshape(1, -1)
    context, tape = attention_forward_batch(np.asarray(h_seq)[None, :, :], h_last, p)
    return context, tape


def attention_backward(d_context: np.ndarray, tape: AttentionTape, p: AttentionParams):
    d_context = np.asarray(d_context, dtype=np.float64).reshape(1, -1)
    d_h_seq, d_h_last, grads = attention_backward_batch(d_context, tape, p)
    return d_h_seq[0], d_h_last, grads


# ── loss and optimizer ──────────────────────────────────────────────────

def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error and its gradient w.r.t. the predictions."""
    pred = np.asarray(pred, dtype=np.float64).ravel()
    target = np.asarray(target, dtype=np.float64).ravel()
    if pred.shape != target.shape or pred.size == 0:
        raise ValueError(f"length mismatch or empty: pred {pred.shape}, "
                         f"target {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff ** 2))
    d_pred = 2.0 * diff / pred.size
    return loss, d_pred


@dataclass
class AdamState:
    """First/second moment accumulators, keyed like the parameter dict."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]

    @classmethod
    def zeros_like(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls(m={k: np.zeros_like(a) for k, a in params.items()},
                   v={k: np.zeros_like(a) for k, a in params.items()})


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: AdamState, t: int, lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8):
    """One bias-corrected Adam update; pure function of its inputs.

    Returns (new_params, new_state) without mutating the arguments.
    """
    if t < 1:
        raise ValueError(f"step index must be >= 1, got {t}")
    if set(params) != set(grads):
        raise ValueError("params and grads must have identical keys")
    new_params: dict[str, np.ndarray] = {}
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    for key, theta in params.items():
        g = grads[key]
        if g.shape != theta.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape "
                             f"{theta.shape} for {key!r}")
        m = beta1 * state.m[key] + (1.0 - beta1) * g
        v = beta2 * state.v[key] + (1.0 - beta2) * g ** 2
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        new_params[key] = theta - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[key], new_v[key] = m, v
    return new_params, AdamState(m=new_m, v=new_v)


# ── finite-difference oracle (tests only) ───────────────────────────────

def gradient_check(loss_fn, params: dict[str, np.ndarray],
                   analytic: dict[str, np.ndarray], eps: float = 1e-5) -> float:
    """Max relative error between analytic gradients and central differences.

    ``loss_fn(params) -> float`` is re-evaluated with each coordinate nudged
    by +/- eps; the relative error per coordinate is
    |a - n| / max(|a|, |n|, 1e-8).
    """
    work = {k: np.array(v, dtype=np.float64, copy=True) for k, v in params.items()}
    worst = 0.0
    for key, theta in work.items():
        a_grad = analytic[key]
        if a_grad.shape != theta.shape:
            raise ValueError(f"analytic gradient shape mismatch for {key!r}")
        flat = theta.reshape(-1)
        a_flat = np.asarray(a_grad, dtype=np.float64).reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + eps
            f_plus = loss_fn(work)
            flat[idx] = orig - eps
            f_minus = loss_fn(work)
            flat[idx] = orig
            numeric = (f_plus - f_minus) / (2.0 * eps)
            denom = max(abs(a_flat[idx]), abs(numeric), 1e-8)
            worst = max(worst, abs(a_flat[idx] - numeric) / denom)
    return worst
