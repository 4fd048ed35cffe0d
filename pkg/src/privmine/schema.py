"""Categorical schemas, discretization, record encoding, and dataset I/O.

A schema is an ordered list of categorical attributes. Records are stored as
integer category codes and mapped to a flat index space by mixed-radix
encoding, with attribute 0 as the least significant digit. Attribute order is
significant: it fixes the radix order of the encoding.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
import yaml

logger = logging.getLogger(__name__)

# A record is one category index per attribute, in schema order.
Record = tuple[int, ...]

MISSING_TOKENS = frozenset({"", "?", "NA", "N/A"})


@dataclass(frozen=True)
class Attribute:
    """One categorical attribute: labels plus optional numeric binning.

    ``bin_edges`` holds interval boundaries for discretizing raw numbers.
    Intervals are lower-open/upper-closed, ``(lo, hi]``; if ``open_upper`` is
    set, a final unbounded category ``> last_edge`` follows the closed bins.
    ``default_category`` is a catch-all label for nominal values not listed
    in ``categories``.
    """

    name: str
    categories: tuple[str, ...]
    bin_edges: tuple[float, ...] | None = None
    open_upper: bool = False
    default_category: str | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("attribute name must be non-empty")
        if len(self.categories) < 2:
            raise ValueError(f"attribute {self.name!r}: needs at least 2 categories")
        if len(set(self.categories)) != len(self.categories):
            raise ValueError(f"attribute {self.name!r}: duplicate category labels")
        if self.bin_edges is not None:
            edges = self.bin_edges
            if len(edges) < 2 or any(a >= b for a, b in zip(edges, edges[1:])):
                raise ValueError(f"attribute {self.name!r}: bin edges must be strictly increasing")
            n_bins = len(edges) - 1 + (1 if self.open_upper else 0)
            if n_bins != len(self.categories):
                raise ValueError(
                    f"attribute {self.name!r}: {n_bins} bins but {len(self.categories)} categories"
                )
        if self.default_category is not None and self.default_category not in self.categories:
            raise ValueError(f"attribute {self.name!r}: default category not among categories")

    @property
    def size(self) -> int:
        return len(self.categories)

    def index_of(self, label: str) -> int:
        try:
            return self.categories.index(label)
        except ValueError:
            if self.default_category is not None:
                return self.categories.index(self.default_category)
            raise ValueError(f"attribute {self.name!r}: unknown category {label!r}") from None


@dataclass(frozen=True)
class Schema:
    """Ordered attribute list defining the mixed-radix record index space."""

    name: str
    attributes: tuple[Attribute, ...]

    def __post_init__(self) -> None:
        if not self.attributes:
            raise ValueError("schema needs at least one attribute")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate attribute names in schema {self.name!r}")

    @cached_property
    def sizes(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.attributes)

    @cached_property
    def radix_prefix(self) -> tuple[int, ...]:
        """n_j = product of the first j attribute sizes, j = 0..M (n_0 = 1)."""
        prefix = [1]
        for s in self.sizes:
            prefix.append(prefix[-1] * s)
        return tuple(prefix)

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def domain_size(self) -> int:
        return self.radix_prefix[-1]

    @cached_property
    def boolean_width(self) -> int:
        """Total width of the one-bit-per-category boolean expansion."""
        return sum(self.sizes)

    @cached_property
    def boolean_offsets(self) -> tuple[int, ...]:
        """Start position of each attribute's block in the boolean expansion."""
        offs = [0]
        for s in self.sizes[:-1]:
            offs.append(offs[-1] + s)
        return tuple(offs)

    def attribute_index(self, name: str) -> int:
        for j, a in enumerate(self.attributes):
            if a.name == name:
                return j
        raise ValueError(f"schema {self.name!r} has no attribute {name!r}")

    def validate_record(self, values: Sequence[int]) -> Record:
        if len(values) != self.n_attributes:
            raise ValueError(f"record has {len(values)} values, schema expects {self.n_attributes}")
        for j, (v, s) in enumerate(zip(values, self.sizes)):
            if not 0 <= int(v) < s:
                raise ValueError(f"attribute {self.attributes[j].name!r}: index {v} out of range [0,{s})")
        return tuple(int(v) for v in values)

    def record_label(self, values: Sequence[int]) -> str:
        return ";".join(a.categories[v] for a, v in zip(self.attributes, values))


@dataclass(frozen=True)
class Dataset:
    """A set of categorical records stored as an (N, M) code matrix."""

    schema: Schema
    codes: np.ndarray
    provenance: str = ""

    def __post_init__(self) -> None:
        codes = np.ascontiguousarray(self.codes, dtype=np.int32)
        if codes.ndim != 2 or codes.shape[1] != self.schema.n_attributes:
            raise ValueError(f"codes must be (N, {self.schema.n_attributes}), got {codes.shape}")
        sizes = np.asarray(self.schema.sizes)
        if codes.size and ((codes < 0) | (codes >= sizes)).any():
            raise ValueError("dataset contains out-of-range category codes")
        object.__setattr__(self, "codes", codes)

    @property
    def n_records(self) -> int:
        return self.codes.shape[0]

    def record(self, i: int) -> Record:
        return tuple(int(v) for v in self.codes[i])

    def __iter__(self) -> Iterator[Record]:
        for row in self.codes:
            yield tuple(int(v) for v in row)


@dataclass(frozen=True)
class BooleanDataset:
    """Bit-vector records over a schema's boolean expansion (perturbed domain).

    Rows are arbitrary points of the boolean cube: perturbation mechanisms
    operating on the expansion may emit vectors that decode to no valid
    categorical record.
    """

    schema: Schema
    bits: np.ndarray
    provenance: str = ""

    def __post_init__(self) -> None:
        bits = np.ascontiguousarray(self.bits, dtype=bool)
        if bits.ndim != 2 or bits.shape[1] != self.schema.boolean_width:
            raise ValueError(f"bits must be (N, {self.schema.boolean_width}), got {bits.shape}")
        object.__setattr__(self, "bits", bits)

    @property
    def n_records(self) -> int:
        return self.bits.shape[0]


# ---------------------------------------------------------------------------
# schema configuration
# ---------------------------------------------------------------------------

def _bin_labels(edges: Sequence[float], open_upper: bool) -> tuple[str, ...]:
    labels = [f"({lo:g}-{hi:g}]" for lo, hi in zip(edges, edges[1:])]
    if open_upper:
        labels.append(f">{edges[-1]:g}")
    return tuple(labels)


def load_schema(config_text: str) -> Schema:
    """Parse a YAML schema config into a validated Schema.

    Each attribute entry carries either ``categories`` (list of labels, with
    optional ``default`` catch-all) or ``bins`` (numeric edges, with optional
    ``open_upper`` flag adding a final unbounded category).
    """
    doc = yaml.safe_load(config_text)
    if not isinstance(doc, dict) or "attributes" not in doc:
        raise ValueError("schema config must be a mapping with an 'attributes' list")
    attributes = []
    for entry in doc["attributes"]:
        name = entry.get("name")
        if not name:
            raise ValueError("schema config: attribute without a name")
        has_cats = "categories" in entry
        has_bins = "bins" in entry
        if has_cats == has_bins:
            raise ValueError(f"attribute {name!r}: exactly one of 'categories'/'bins' required")
        if has_bins:
            edges = tuple(float(e) for e in entry["bins"])
            open_upper = bool(entry.get("open_upper", False))
            attributes.append(
                Attribute(name=name, categories=_bin_labels(edges, open_upper),
                          bin_edges=edges, open_upper=open_upper)
            )
        else:
            attributes.append(
                Attribute(name=name, categories=tuple(str(c) for c in entry["categories"]),
                          default_category=entry.get("default"))
            )
    return Schema(name=str(doc.get("name", "unnamed")), attributes=tuple(attributes))


def builtin_schema(name: str) -> Schema:
    """Load one of the packaged schema configs (e.g. 'census', 'health')."""
    return load_schema(_builtin_config_text(name))


def _builtin_config_text(name: str) -> str:
    from importlib import resources

    ref = resources.files(__package__) / "schemas" / f"{name}.yaml"
    try:
        return ref.read_text()
    except FileNotFoundError:
        raise ValueError(f"no builtin schema named {name!r}") from None


def schema_fingerprint(schema: Schema) -> str:
    """Stable hash of the schema structure, for provenance metadata."""
    import hashlib

    parts = [schema.name]
    for a in schema.attributes:
        parts.append(a.name)
        parts.extend(a.categories)
        parts.append(str(a.bin_edges))
    return hashlib.sha256("\x1f".join(parts).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# discretization and encoding
# ---------------------------------------------------------------------------

def discretize(raw_value: float, attribute: Attribute, clamp: bool = False) -> int:
    """Map a raw number to its (lo, hi] bin index.

    Values at an interior boundary fall in the lower interval. Out-of-range
    values raise unless ``clamp`` is set, in which case they map to the
    nearest end bin.
    """
    if attribute.bin_edges is None:
        raise ValueError(f"attribute {attribute.name!r} has no discretization rules")
    edges = attribute.bin_edges
    if not np.isfinite(raw_value):
        raise ValueError(f"attribute {attribute.name!r}: non-finite value {raw_value!r}")
    if raw_value <= edges[0]:
        if clamp:
            return 0
        raise ValueError(f"attribute {attribute.name!r}: value {raw_value:g} below first bin")
    # index of the first edge >= value, minus one, is the (lo, hi] bin
    idx = int(np.searchsorted(edges, raw_value, side="left")) - 1
    if idx >= len(edges) - 1:
        if attribute.open_upper:
            return len(edges) - 1
        if clamp:
            return len(edges) - 2
        raise ValueError(f"attribute {attribute.name!r}: value {raw_value:g} above last bin")
    return idx


def encode(record: Sequence[int], schema: Schema) -> int:
    """Mixed-radix index of a record: sum of v_j * n_{j-1}."""
    values = schema.validate_record(record)
    prefix = schema.radix_prefix
    return sum(v * prefix[j] for j, v in enumerate(values))


def decode(index: int, schema: Schema) -> Record:
    """Inverse of encode."""
    if not 0 <= index < schema.domain_size:
        raise ValueError(f"index {index} out of range [0, {schema.domain_size})")
    values = []
    for s in schema.sizes:
        values.append(index % s)
        index //= s
    return tuple(values)


def encode_rows(codes: np.ndarray, schema: Schema, attrs: Sequence[int] | None = None) -> np.ndarray:
    """Vectorized mixed-radix encoding of code rows, optionally restricted to
    an attribute subset (the subset's own radix order)."""
    if attrs is None:
        attrs = range(schema.n_attributes)
    attrs = list(attrs)
    weights = np.empty(len(attrs), dtype=np.int64)
    w = 1
    for t, j in enumerate(attrs):
        weights[t] = w
        w *= schema.sizes[j]
    return codes[:, attrs].astype(np.int64) @ weights


def decode_indices(indices: np.ndarray, schema: Schema) -> np.ndarray:
    """Vectorized decode of flat indices into an (N, M) code matrix."""
    out = np.empty((len(indices), schema.n_attributes), dtype=np.int32)
    rem = np.asarray(indices, dtype=np.int64).copy()
    for j, s in enumerate(schema.sizes):
        out[:, j] = rem % s
        rem //= s
    return out


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------

def ingest_csv(
    path: str,
    schema: Schema,
    column_map: Mapping[str, int | str] | None = None,
    has_header: bool | None = None,
    on_error: str = "skip",
    clamp: bool = False,
) -> Dataset:
    """Read a CSV file into a Dataset, discretizing numeric attributes.

    Args:
        path: CSV file path. Fields are stripped of surrounding whitespace,
            so comma+space formats are accepted.
        schema: target schema.
        column_map: attribute name -> column (header name or 0-based index).
            Defaults to matching header names, or schema order when the file
            has no header.
        has_header: force header presence; default autodetects by checking
            whether the first row's mapped fields parse.
        on_error: 'skip' drops rows with missing or unparseable values and
            logs the count; 'abort' raises on the first bad row.
        clamp: clamp out-of-range numeric values to the end bins.

    Binned attributes accept either raw numbers or exact bin labels, so
    datasets written by this package re-ingest cleanly.
    """
    if on_error not in ("skip", "abort"):
        raise ValueError(f"on_error must be 'skip' or 'abort', got {on_error!r}")
    with open(path, newline="") as fh:
        return _ingest_rows(csv.reader(fh), schema, column_map, has_header, on_error, clamp, path)


def ingest_csv_text(text: str, schema: Schema, **kwargs) -> Dataset:
    """ingest_csv over an in-memory string (mainly for tests)."""
    column_map = kwargs.pop("column_map", None)
    has_header = kwargs.pop("has_header", None)
    on_error = kwargs.pop("on_error", "skip")
    clamp = kwargs.pop("clamp", False)
    if kwargs:
        raise TypeError(f"unexpected arguments: {sorted(kwargs)}")
    return _ingest_rows(csv.reader(io.StringIO(text)), schema, column_map, has_header,
                        on_error, clamp, "<text>")


def _parse_field(field_text: str, attribute: Attribute, clamp: bool) -> int:
    text = field_text.strip()
    # exact label match first, so bin labels and literal '?' categories win
    if text in attribute.categories:
        return attribute.categories.index(text)
    if text in MISSING_TOKENS:
        raise ValueError(f"attribute {attribute.name!r}: missing value")
    if attribute.bin_edges is not None:
        try:
            number = float(text)
        except ValueError:
            raise ValueError(f"attribute {attribute.name!r}: cannot parse {text!r}") from None
        return discretize(number, attribute, clamp=clamp)
    return attribute.index_of(text)


def _ingest_rows(rows, schema, column_map, has_header, on_error, clamp, source) -> Dataset:
    rows = iter(rows)
    first = next(rows, None)
    if first is None:
        return Dataset(schema, np.empty((0, schema.n_attributes), dtype=np.int32),
                       provenance=f"csv:{source} (empty)")

    name_by_attr = {a.name: a for a in schema.attributes}
    if column_map is None:
        stripped = [f.strip() for f in first]
        if has_header is None:
            has_header = all(a.name in stripped for a in schema.attributes)
        if has_header:
            col_idx = {a.name: stripped.index(a.name) for a in schema.attributes}
        else:
            col_idx = {a.name: j for j, a in enumerate(schema.attributes)}
    else:
        missing = [a.name for a in schema.attributes if a.name not in column_map]
        if missing:
            raise ValueError(f"column_map missing attributes: {missing}")
        if has_header is None:
            has_header = any(isinstance(c, str) for c in column_map.values())
        if has_header:
            stripped = [f.strip() for f in first]
            col_idx = {}
            for name, col in column_map.items():
                if isinstance(col, str):
                    if col not in stripped:
                        raise ValueError(f"column {col!r} not found in header")
                    col_idx[name] = stripped.index(col)
                else:
                    col_idx[name] = int(col)
        else:
            col_idx = {name: int(col) for name, col in column_map.items()}

    data_rows: Iterable[list[str]] = rows if has_header else _chain_first(first, rows)
    out: list[list[int]] = []
    skipped = 0
    for row_no, row in enumerate(data_rows, start=2 if has_header else 1):
        if not row or all(not f.strip() for f in row):
            continue
        try:
            parsed = [
                _parse_field(row[col_idx[a.name]], a, clamp) if col_idx[a.name] < len(row)
                else _raise_short_row(a)
                for a in schema.attributes
            ]
        except ValueError as exc:
            if on_error == "abort":
                raise ValueError(f"{source} row {row_no}: {exc}") from None
            skipped += 1
            continue
        out.append(parsed)
    if skipped:
        logger.info("%s: skipped %d rows with missing or unparseable values", source, skipped)
    codes = np.asarray(out, dtype=np.int32).reshape(len(out), schema.n_attributes)
    return Dataset(schema, codes, provenance=f"csv:{source} (rows={len(out)}, skipped={skipped})")


def _raise_short_row(attribute: Attribute) -> int:
    raise ValueError(f"attribute {attribute.name!r}: row too short")


def _chain_first(first, rest):
    yield first
    yield from rest


def write_csv(dataset: Dataset, path: str) -> None:
    """Write a dataset as a header + category-label CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([a.name for a in dataset.schema.attributes])
        cats = [a.categories for a in dataset.schema.attributes]
        for row in dataset.codes:
            writer.writerow([cats[j][v] for j, v in enumerate(row)])


def write_boolean_csv(data: BooleanDataset, path: str) -> None:
    """Write a boolean-cube dataset as a 0/1 CSV, one column per category bit."""
    header = [
        f"{a.name}={c}" for a in data.schema.attributes for c in a.categories
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        np.savetxt(fh, data.bits.astype(np.int8), fmt="%d", delimiter=",")


def read_boolean_csv(path: str, schema: Schema) -> BooleanDataset:
    bits = np.loadtxt(path, dtype=np.int8, delimiter=",", skiprows=1, ndmin=2)
    return BooleanDataset(schema, bits.astype(bool), provenance=f"csv:{path}")


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------

def generate_synthetic(schema: Schema, n: int, distribution, seed: int) -> Dataset:
    """Draw n i.i.d. records from a specified distribution.

    ``distribution`` is one of:
      - the string 'uniform';
      - a sequence of per-attribute weight vectors (independent attributes);
      - a joint weight vector over the full domain (length domain_size), or
        any object exposing one through a ``values`` attribute.
    Deterministic given seed.
    """
    rng = np.random.default_rng(seed)
    if isinstance(distribution, str):
        if distribution != "uniform":
            raise ValueError(f"unknown distribution spec {distribution!r}")
        codes = np.column_stack([rng.integers(0, s, size=n) for s in schema.sizes])
        return Dataset(schema, codes, provenance=f"synthetic:uniform(seed={seed})")

    spec = getattr(distribution, "values", distribution)
    if isinstance(spec, np.ndarray) or (
        isinstance(spec, Sequence) and spec and np.isscalar(spec[0])
    ):
        joint = np.asarray(spec, dtype=float)
        if joint.shape != (schema.domain_size,):
            raise ValueError(f"joint distribution must have length {schema.domain_size}")
        joint = _normalized(joint, "joint distribution")
        idx = rng.choice(schema.domain_size, size=n, p=joint)
        return Dataset(schema, decode_indices(idx, schema),
                       provenance=f"synthetic:joint(seed={seed})")

    weight_lists = list(spec)
    if len(weight_lists) != schema.n_attributes:
        raise ValueError(f"need {schema.n_attributes} weight vectors, got {len(weight_lists)}")
    cols = []
    for j, weights in enumerate(weight_lists):
        w = _normalized(np.asarray(weights, dtype=float), f"attribute {schema.attributes[j].name!r}")
        if len(w) != schema.sizes[j]:
            raise ValueError(f"attribute {schema.attributes[j].name!r}: "
                             f"{len(w)} weights for {schema.sizes[j]} categories")
        cols.append(rng.choice(schema.sizes[j], size=n, p=w))
    return Dataset(schema, np.column_stack(cols), provenance=f"synthetic:independent(seed={seed})")


def _normalized(weights: np.ndarray, what: str) -> np.ndarray:
    if (weights < 0).any():
        raise ValueError(f"{what}: negative weights")
    total = weights.sum()
    if not total > 0:
        raise ValueError(f"{what}: weights sum to zero")
    return weights / total


def load_reference_distribution(config_text: str, schema: Schema) -> np.ndarray:
    """Build the joint distribution declared in a schema config.

    The config's ``reference_distribution`` section mixes an independent
    background (product of per-attribute marginals, weight ``background``)
    with point-mass modes (full category assignments). The result is a fixed,
    deterministic joint over the schema's domain, suitable as a stand-in when
    the original survey data is unavailable.
    """
    doc = yaml.safe_load(config_text)
    section = (doc or {}).get("reference_distribution")
    if section is None:
        raise ValueError("config has no reference_distribution section")
    marginals = []
    for a in schema.attributes:
        w = section.get("marginals", {}).get(a.name)
        if w is None:
            raise ValueError(f"reference_distribution: no marginal for attribute {a.name!r}")
        marginals.append(_normalized(np.asarray(w, dtype=float), f"marginal {a.name!r}"))
        if len(marginals[-1]) != a.size:
            raise ValueError(f"marginal {a.name!r}: wrong length")

    background = float(section.get("background", 1.0))
    joint = marginals[0]
    for w in marginals[1:]:
        # mixed-radix order: attribute 0 is least significant
        joint = (joint[None, :] * w[:, None]).ravel()
    joint = background * joint

    for mode in section.get("modes", []):
        weight = float(mode["weight"])
        values = [schema.attributes[j].index_of(str(mode["values"][schema.attributes[j].name]))
                  for j in range(schema.n_attributes)]
        joint[encode(values, schema)] += weight
    return _normalized(joint, "reference distribution")


def builtin_distribution(name: str) -> np.ndarray:
    """Reference joint distribution packaged with a builtin schema."""
    return load_reference_distribution(_builtin_config_text(name), builtin_schema(name))
