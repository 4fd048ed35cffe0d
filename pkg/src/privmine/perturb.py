"""Perturbation mechanisms: matrix specifications and record samplers.

Every mechanism is described by a column-stochastic transition matrix A with
A[v, u] = p(original u -> perturbed v). The gamma-diagonal family never
materializes A: a dependent per-attribute chain sampler draws from the exact
column distribution in O(sum of attribute sizes) work per record. MASK and
cut-and-paste operate on the boolean expansion of records.

Randomness contract: dataset-level operations derive one independent stream
per record from (seed, record index), so results are reproducible and
independent of record order and thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .schema import BooleanDataset, Dataset, Record, Schema, decode_indices

_ENTRY_TOL = 1e-10


# ---------------------------------------------------------------------------
# mechanism specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaDiagonalSpec:
    """Perturbation matrix with gamma*x on the diagonal and x elsewhere,
    x = 1/(gamma + n - 1). Column-stochastic by construction; the ratio of
    any two entries in a row is exactly gamma."""

    gamma: float
    schema: Schema

    def __post_init__(self) -> None:
        if not self.gamma > 1:
            raise ValueError(f"gamma must be > 1, got {self.gamma}")
        if self.gamma * self.x > 1 + 1e-12:
            raise ValueError("diagonal entry exceeds 1")  # unreachable for gamma > 1

    @property
    def n(self) -> int:
        return self.schema.domain_size

    @property
    def x(self) -> float:
        return 1.0 / (self.gamma + self.n - 1)

    @property
    def diag(self) -> float:
        return self.gamma * self.x

    @property
    def off(self) -> float:
        return self.x

    def condition_number(self) -> float:
        """Closed form 1 + n/(gamma - 1) = (gamma + n - 1)/(gamma - 1)."""
        return (self.gamma + self.n - 1) / (self.gamma - 1)


@dataclass(frozen=True)
class RandomizedGammaSpec:
    """Gamma-diagonal mechanism where each client privately shifts the
    diagonal by r ~ Uniform[-alpha, alpha], off-diagonal by -r/(n-1), keeping
    every realized matrix column-stochastic with expectation equal to the
    base matrix."""

    base: GammaDiagonalSpec
    alpha: float

    def __post_init__(self) -> None:
        lim = self.max_alpha(self.base)
        if not 0 <= self.alpha <= lim + 1e-15:
            raise ValueError(f"alpha must lie in [0, {lim:.6g}], got {self.alpha}")

    @staticmethod
    def max_alpha(base: GammaDiagonalSpec) -> float:
        # keeps both d = gamma*x + r and o = x - r/(n-1) nonnegative
        return min(base.gamma * base.x, (base.n - 1) * base.x)

    @classmethod
    def from_fraction(cls, base: GammaDiagonalSpec, alpha_fraction: float) -> "RandomizedGammaSpec":
        """alpha expressed as a fraction of the diagonal entry gamma*x."""
        return cls(base, alpha_fraction * base.gamma * base.x)

    @property
    def realized_ratio_bound(self) -> float:
        """Largest d/o ratio any client's realized matrix can exhibit."""
        base = self.base
        return (base.gamma * base.x + self.alpha) / (base.x - self.alpha / (base.n - 1))


@dataclass(frozen=True)
class MaskSpec:
    """Independent bit flips over the boolean expansion: each of the M_b bits
    is retained with probability p, flipped with 1-p."""

    p: float
    schema: Schema

    def __post_init__(self) -> None:
        if not 0.5 <= self.p < 1:
            raise ValueError(f"retention probability must lie in [0.5, 1), got {self.p}")
        if self.M_b < 2 * self.schema.n_attributes:
            raise ValueError("boolean width below 2 bits per attribute")  # unreachable

    @property
    def M_b(self) -> int:
        return self.schema.boolean_width


@dataclass(frozen=True)
class CutPasteSpec:
    """Cut-and-paste operator: keep w = min(j, M) original items with j drawn
    uniformly from {0..K}, then add every other universe item independently
    with probability rho_cp."""

    K: int
    rho_cp: float
    schema: Schema

    def __post_init__(self) -> None:
        if not 0 <= self.K <= self.M:
            raise ValueError(f"K must lie in [0, {self.M}], got {self.K}")
        if not 0 <= self.rho_cp <= 1:
            raise ValueError(f"rho_cp must lie in [0, 1], got {self.rho_cp}")

    @property
    def M(self) -> int:
        return self.schema.n_attributes

    @property
    def M_b(self) -> int:
        return self.schema.boolean_width


@dataclass(frozen=True)
class MaterializedMatrix:
    """Dense column-stochastic transition matrix, |S_V| x |S_U|."""

    entries: np.ndarray
    col_labels: tuple[str, ...] | None = None
    row_labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2:
            raise ValueError("matrix entries must be 2-dimensional")
        if (entries < 0).any():
            raise ValueError("matrix entries must be nonnegative")
        sums = entries.sum(axis=0)
        bad = np.abs(sums - 1.0) > _ENTRY_TOL
        if bad.any():
            raise ValueError(
                f"columns must sum to 1 within {_ENTRY_TOL:g}; "
                f"worst deviation {np.abs(sums - 1.0).max():.3e}"
            )
        object.__setattr__(self, "entries", entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


# ---------------------------------------------------------------------------
# per-record random streams
# ---------------------------------------------------------------------------

def record_rng(seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible stream for one record, order-independent."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _per_record_uniforms(seed: int, n_records: int, width: int, threads: int = 1) -> np.ndarray:
    """(n_records, width) uniforms; row i comes entirely from record i's stream."""
    out = np.empty((n_records, width))

    def fill(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            out[i] = record_rng(seed, i).random(width)

    if threads <= 1 or n_records < 2048:
        fill(0, n_records)
    else:
        step = -(-n_records // threads)
        bounds = [(lo, min(lo + step, n_records)) for lo in range(0, n_records, step)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: fill(*b), bounds))
    return out


# ---------------------------------------------------------------------------
# gamma-diagonal family
# ---------------------------------------------------------------------------

def gd_entry(u: int, v: int, spec: GammaDiagonalSpec) -> float:
    """Transition probability p(u -> v): gamma*x on the diagonal, x off it."""
    n = spec.n
    if not (0 <= u < n and 0 <= v < n):
        raise ValueError(f"indices must lie in [0, {n})")
    return spec.diag if u == v else spec.off


def gd_matrix(spec: GammaDiagonalSpec, max_size: int = 4096) -> MaterializedMatrix:
    """Dense form of the gamma-diagonal matrix, for small domains."""
    n = spec.n
    if n > max_size:
        raise ValueError(f"refusing to materialize {n}x{n} matrix (max_size={max_size})")
    entries = np.full((n, n), spec.off)
    np.fill_diagonal(entries, spec.diag)
    return MaterializedMatrix(entries)


def draw_client_params(spec: RandomizedGammaSpec, rng: np.random.Generator) -> tuple[float, float]:
    """One client's (diagonal, off-diagonal) pair: d = gamma*x + r,
    o = x - r/(n-1), r ~ Uniform[-alpha, alpha]. Satisfies d + (n-1)o = 1."""
    base = spec.base
    r = spec.alpha * (2.0 * rng.random() - 1.0)
    return base.gamma * base.x + r, base.x - r / (base.n - 1)


def _check_chain_params(d: float, o: float, n: int) -> None:
    if not (d > 0 and o > 0):
        raise ValueError(f"need positive chain parameters, got d={d}, o={o}")
    if abs(d + (n - 1) * o - 1.0) > 1e-9:
        raise ValueError(f"chain parameters must satisfy d + (n-1)*o = 1, got {d + (n - 1) * o}")


def perturb_chain(
    record: Record, d: float, o: float, schema: Schema, rng: np.random.Generator
) -> Record:
    """Sample a perturbed record whose full-domain distribution is exactly the
    gamma-diagonal column: probability d of reproducing the input, o for each
    other domain value.

    Attribute j's value is drawn conditioned on the already-perturbed values
    of attributes 1..j-1. While every previous attribute still matches the
    original, the original value keeps elevated odds; after the first
    mismatch the remaining attributes are uniform. One uniform draw is
    consumed per attribute.
    """
    n = schema.domain_size
    _check_chain_params(d, o, n)
    values = schema.validate_record(record)
    D = d - o
    out = []
    matched = True
    m_prev = n  # domain cells per realized prefix, n_M / n_{j-1}
    for j, s in enumerate(schema.sizes):
        m_j = m_prev // s
        u = rng.random()
        if matched:
            p_keep = (D + m_j * o) / (D + m_prev * o)
            if u < p_keep:
                v = values[j]
            else:
                # remaining mass is uniform over the other s-1 values
                t = int((u - p_keep) / (1.0 - p_keep) * (s - 1))
                t = min(t, s - 2)
                v = t + (1 if t >= values[j] else 0)
                matched = False
        else:
            v = min(int(u * s), s - 1)
        out.append(v)
        m_prev = m_j
    return tuple(out)


def chain_column(record: Record, d: float, o: float, schema: Schema) -> np.ndarray:
    """Analytic output distribution of perturb_chain for one input record,
    computed by multiplying the per-attribute conditional probabilities the
    sampler uses (not by shortcutting to the known column form)."""
    n = schema.domain_size
    _check_chain_params(d, o, n)
    values = schema.validate_record(record)
    digits = decode_indices(np.arange(n), schema)
    D = d - o
    probs = np.ones(n)
    matched = np.ones(n, dtype=bool)
    m_prev = n
    for j, s in enumerate(schema.sizes):
        m_j = m_prev // s
        eq = digits[:, j] == values[j]
        keep_p = (D + m_j * o) / (D + m_prev * o)
        switch_p = (m_j * o) / (D + m_prev * o)  # (1 - keep_p)/(s - 1)
        probs *= np.where(matched, np.where(eq, keep_p, switch_p), 1.0 / s)
        matched &= eq
        m_prev = m_j
    return probs


def _chain_bulk(codes: np.ndarray, uniforms: np.ndarray, d: np.ndarray, o: np.ndarray,
                schema: Schema) -> np.ndarray:
    """Vectorized chain sampler; row i uses uniforms[i] and (d[i], o[i]).
    Arithmetic mirrors perturb_chain exactly."""
    out = np.empty_like(codes)
    D = d - o
    matched = np.ones(len(codes), dtype=bool)
    m_prev = schema.domain_size
    for j, s in enumerate(schema.sizes):
        m_j = m_prev // s
        u = uniforms[:, j]
        p_keep = (D + m_j * o) / (D + m_prev * o)
        keep = matched & (u < p_keep)
        t = ((u - p_keep) / (1.0 - p_keep) * (s - 1)).astype(np.int64)
        np.clip(t, 0, s - 2, out=t)
        switched = t + (t >= codes[:, j])
        fresh = np.minimum((u * s).astype(np.int64), s - 1)
        out[:, j] = np.where(matched, np.where(keep, codes[:, j], switched), fresh)
        matched = keep
        m_prev = m_j
    return out


def perturb_dataset(
    dataset: Dataset,
    spec: GammaDiagonalSpec | RandomizedGammaSpec,
    seed: int,
    threads: int = 1,
) -> Dataset:
    """Perturb every record through the gamma-diagonal family.

    Record i's stream supplies, in order: the client's r draw (randomized
    spec only), then one uniform per attribute for the chain sampler.
    """
    randomized = isinstance(spec, RandomizedGammaSpec)
    base = spec.base if randomized else spec
    if base.schema is not dataset.schema and base.schema != dataset.schema:
        raise ValueError("mechanism schema does not match dataset schema")
    n_rec = dataset.n_records
    width = dataset.schema.n_attributes + (1 if randomized else 0)
    uniforms = _per_record_uniforms(seed, n_rec, width, threads)
    if randomized:
        r = spec.alpha * (2.0 * uniforms[:, 0] - 1.0)
        d = base.gamma * base.x + r
        o = base.x - r / (base.n - 1)
        uniforms = uniforms[:, 1:]
        label = f"ran-gd(gamma={base.gamma:g}, alpha={spec.alpha:g}, seed={seed})"
    else:
        d = np.full(n_rec, base.diag)
        o = np.full(n_rec, base.off)
        label = f"det-gd(gamma={base.gamma:g}, seed={seed})"
    out = _chain_bulk(dataset.codes, uniforms, d, o, dataset.schema)
    return Dataset(dataset.schema, out, provenance=label)


def perturb_generic(record: Record, matrix: MaterializedMatrix, rng: np.random.Generator,
                    schema: Schema | None = None) -> int:
    """Inverse-CDF sample from the matrix column of the given record.

    The record may be a flat column index or a categorical record (with
    ``schema`` supplied). Returns the flat index of the perturbed value;
    ground-truth oracle for the chain sampler.
    """
    if schema is not None:
        from .schema import encode

        col = encode(record, schema)  # type: ignore[arg-type]
    else:
        col = int(record)  # type: ignore[arg-type]
    if not 0 <= col < matrix.shape[1]:
        raise ValueError(f"column {col} out of range")
    cdf = np.cumsum(matrix.entries[:, col])
    return int(np.searchsorted(cdf, rng.random(), side="right"))


# ---------------------------------------------------------------------------
# MASK
# ---------------------------------------------------------------------------

def mask_expand(record: Record, schema: Schema) -> np.ndarray:
    """One-bit-per-category boolean expansion: exactly M ones."""
    values = schema.validate_record(record)
    bits = np.zeros(schema.boolean_width, dtype=bool)
    for off, v in zip(schema.boolean_offsets, values):
        bits[off + v] = True
    return bits


def mask_expand_many(codes: np.ndarray, schema: Schema) -> np.ndarray:
    bits = np.zeros((len(codes), schema.boolean_width), dtype=bool)
    offsets = np.asarray(schema.boolean_offsets)
    bits[np.arange(len(codes))[:, None], offsets + codes] = True
    return bits


def mask_collapse(bits: np.ndarray, schema: Schema) -> Record | None:
    """Inverse of mask_expand; None if some block lacks exactly one set bit."""
    values = []
    for off, s in zip(schema.boolean_offsets, schema.sizes):
        block = np.flatnonzero(bits[off:off + s])
        if len(block) != 1:
            return None
        values.append(int(block[0]))
    return tuple(values)


def mask_perturb(bits: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """Retain each bit with probability p, flip with 1-p. p=1 is the identity."""
    if not 0 < p <= 1:
        raise ValueError(f"retention probability must lie in (0, 1], got {p}")
    return bits ^ (rng.random(len(bits)) >= p)


def mask_dataset(dataset: Dataset, spec: MaskSpec, seed: int, threads: int = 1) -> BooleanDataset:
    """Expand every record to its boolean form and flip bits independently."""
    bits = mask_expand_many(dataset.codes, dataset.schema)
    uniforms = _per_record_uniforms(seed, dataset.n_records, spec.M_b, threads)
    return BooleanDataset(
        dataset.schema,
        bits ^ (uniforms >= spec.p),
        provenance=f"mask(p={spec.p:g}, seed={seed})",
    )


def mask_p_for_gamma(gamma: float, M: int) -> float:
    """Smallest retention probability meeting the gamma ratio bound for
    records with exactly M ones: solves (p/(1-p))^(2M) = gamma."""
    if gamma < 1:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    t = gamma ** (1.0 / (2 * M))
    return t / (1.0 + t)


def mask_matrix(M_b: int, p: float, max_width: int = 12) -> MaterializedMatrix:
    """Dense MASK transition matrix over the full boolean cube:
    entry[v, u] = p^matches * (1-p)^(M_b - matches)."""
    if M_b > max_width:
        raise ValueError(f"refusing to materialize 2^{M_b} cube (max_width={max_width})")
    idx = np.arange(1 << M_b, dtype=np.uint32)
    flips = np.bitwise_count(idx[:, None] ^ idx[None, :]).astype(float)
    return MaterializedMatrix(p ** (M_b - flips) * (1 - p) ** flips)


# ---------------------------------------------------------------------------
# cut-and-paste
# ---------------------------------------------------------------------------

def _cut_count_pmf(K: int, M: int) -> np.ndarray:
    """Distribution of the number of items cut: w = min(j, M), j ~ U{0..K}."""
    pmf = np.zeros(min(K, M) + 1)
    for j in range(K + 1):
        pmf[min(j, M)] += 1.0 / (K + 1)
    return pmf


def cut_paste_entry(q: int, l_v: int, spec: CutPasteSpec) -> float:
    """Probability of one specific output vector with l_v ones, q of which
    coincide with the original record's M ones."""
    M, M_b, rho = spec.M, spec.M_b, spec.rho_cp
    if not (0 <= q <= min(l_v, M) and l_v - q <= M_b - M):
        raise ValueError(f"infeasible overlap: q={q}, l_v={l_v}")
    pmf = _cut_count_pmf(spec.K, M)
    total = 0.0
    for w in range(min(len(pmf) - 1, q) + 1):
        total += (
            pmf[w]
            * (math.comb(q, w) / math.comb(M, w))
            * rho ** (q - w) * (1 - rho) ** (M - q)
            * rho ** (l_v - q) * (1 - rho) ** (M_b - M - l_v + q)
        )
    if total < 0:
        raise ValueError("cut-and-paste parameters produced a negative probability")
    return total


def cut_paste_matrix(spec: CutPasteSpec, max_cells: int = 1 << 22) -> MaterializedMatrix:
    """Dense transition matrix: rows over the full boolean cube, one column
    per valid record of the schema. Feasible only for small widths."""
    schema = spec.schema
    n_rows, n_cols = 1 << spec.M_b, schema.domain_size
    if n_rows * n_cols > max_cells:
        raise ValueError(
            f"cut-and-paste matrix would need {n_rows}x{n_cols} entries; "
            f"use cut_paste_class_matrix for large widths"
        )
    records = decode_indices(np.arange(n_cols), schema)
    u_ints = _bits_to_ints(mask_expand_many(records, schema))
    v_ints = np.arange(n_rows, dtype=np.uint64)
    l_v = np.bitwise_count(v_ints).astype(int)
    # entry depends on (q, l_v) only; evaluate each pair once
    table = np.full((spec.M + 1, spec.M_b + 1), np.nan)
    entries = np.empty((n_rows, n_cols))
    for c, u in enumerate(u_ints):
        q = np.bitwise_count(v_ints & u).astype(int)
        for qq, ll in set(zip(q.tolist(), l_v.tolist())):
            if np.isnan(table[qq, ll]):
                table[qq, ll] = cut_paste_entry(qq, ll, spec)
        entries[:, c] = table[q, l_v]
    labels = tuple(schema.record_label(r) for r in records)
    return MaterializedMatrix(entries, col_labels=labels)


def cut_paste_class_matrix(spec: CutPasteSpec, window: int) -> np.ndarray:
    """Transition matrix between overlap classes of a ``window``-bit itemset:
    entry [l_v, l_u] is the probability that a record carrying l_u of the
    window's bits is perturbed into one carrying l_v of them.

    Square (window+1) x (window+1); requires window <= M so that every
    overlap count 0..window is realizable by a valid record.
    """
    M, M_b, rho = spec.M, spec.M_b, spec.rho_cp
    if not 1 <= window <= M:
        raise ValueError(f"window must lie in [1, {M}], got {window}")
    pmf_w = _cut_count_pmf(spec.K, M)
    # p_M[z]: total original items surviving into the output
    p_z = np.zeros(M + 1)
    for z in range(M + 1):
        for w in range(min(len(pmf_w) - 1, z) + 1):
            p_z[z] += pmf_w[w] * math.comb(M - w, z - w) * rho ** (z - w) * (1 - rho) ** (M - z)
    out = np.zeros((window + 1, window + 1))
    for l_u in range(window + 1):
        for l_vv in range(window + 1):
            acc = 0.0
            for z in range(M + 1):
                q_lo = max(0, z + l_u - M, l_u + l_vv - window)
                q_hi = min(z, l_u, l_vv)
                for q in range(q_lo, q_hi + 1):
                    hyp = math.comb(l_u, q) * math.comb(M - l_u, z - q) / math.comb(M, z)
                    acc += (
                        p_z[z] * hyp * math.comb(window - l_u, l_vv - q)
                        * rho ** (l_vv - q) * (1 - rho) ** (window - l_u - l_vv + q)
                    )
            out[l_vv, l_u] = acc
    if (out < 0).any():
        raise ValueError("cut-and-paste parameters produced a negative probability")
    sums = out.sum(axis=0)
    if np.abs(sums - 1.0).max() > 1e-8:
        raise ValueError("cut-and-paste class matrix columns do not sum to 1")
    return out


def cut_paste_perturb(bits: np.ndarray, spec: CutPasteSpec, rng: np.random.Generator) -> np.ndarray:
    """Direct simulation of the operator on one boolean record."""
    j = int(rng.integers(0, spec.K + 1))
    ones = np.flatnonzero(bits)
    w = min(j, len(ones))
    out = rng.random(spec.M_b) < spec.rho_cp
    if w:
        out[rng.choice(ones, size=w, replace=False)] = True
    return out


def cut_paste_dataset(dataset: Dataset, spec: CutPasteSpec, seed: int,
                      threads: int = 1) -> BooleanDataset:
    del threads  # cut-and-paste draws are variable-length; kept single-threaded
    bits = mask_expand_many(dataset.codes, dataset.schema)
    out = np.empty_like(bits)
    for i in range(len(bits)):
        out[i] = cut_paste_perturb(bits[i], spec, record_rng(seed, i))
    return BooleanDataset(
        dataset.schema, out,
        provenance=f"cut-paste(K={spec.K}, rho={spec.rho_cp:g}, seed={seed})",
    )


def _bits_to_ints(bits: np.ndarray) -> np.ndarray:
    weights = (1 << np.arange(bits.shape[1], dtype=np.uint64))
    return bits.astype(np.uint64) @ weights


# ---------------------------------------------------------------------------
# conditioning
# ---------------------------------------------------------------------------

def condition_number(matrix) -> float:
    """Ratio of extreme singular values; the gamma-diagonal closed form when
    given a spec. Singular matrices report math.inf."""
    if isinstance(matrix, GammaDiagonalSpec):
        return matrix.condition_number()
    if isinstance(matrix, RandomizedGammaSpec):
        # the miner reconstructs with the expected matrix, which is the base
        return matrix.base.condition_number()
    entries = matrix.entries if isinstance(matrix, MaterializedMatrix) else np.asarray(matrix, float)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValueError("condition number needs a square matrix or a spec")
    if np.allclose(entries, entries.T, rtol=0.0, atol=1e-12):
        mags = np.abs(np.linalg.eigvalsh(entries))
    else:
        mags = np.linalg.svd(entries, compute_uv=False)
    largest, smallest = mags.max(), mags.min()
    if smallest == 0.0:
        return math.inf
    return float(largest / smallest)
