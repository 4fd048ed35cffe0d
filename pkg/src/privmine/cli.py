"""Command-line harness: privacy calculus, perturbation, mining, evaluation,
and multi-mechanism comparison tables.

Subcommands mirror the trust boundary: ``perturb`` is the client side (the
only place randomness and the seed live), ``mine``/``evaluate`` are the miner
side and read only public mechanism parameters from the metadata file.
``compare`` orchestrates both sides in memory across seeds and mechanisms
and writes one CSV per comparison table plus a JSON summary.

Exit codes: 0 success, 1 validation failure, 2 I/O failure, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from .metrics import accuracy_report
from .mining import (
    MiningResult,
    apriori_plain,
    apriori_reconstructed,
    itemset_label,
    parse_itemset,
)
from .perturb import (
    CutPasteSpec,
    GammaDiagonalSpec,
    MaskSpec,
    RandomizedGammaSpec,
    condition_number,
    cut_paste_class_matrix,
    cut_paste_dataset,
    mask_dataset,
    mask_p_for_gamma,
    perturb_dataset,
)
from .privacy import PrivacyTarget, gamma_for, posterior_range, worst_case_posterior
from .reconstruct import SubsetMarginalSpec, mask_itemset_condition
from .schema import (
    BooleanDataset,
    Dataset,
    Schema,
    builtin_distribution,
    builtin_schema,
    generate_synthetic,
    ingest_csv,
    load_reference_distribution,
    load_schema,
    read_boolean_csv,
    schema_fingerprint,
    write_boolean_csv,
    write_csv,
)

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERICAL = 0, 1, 2, 3

MECHANISMS = ("det-gd", "ran-gd", "mask", "cut-paste")


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with the validation code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# shared argument groups and loaders
# ---------------------------------------------------------------------------

def _add_schema_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--schema", required=True,
                   help="builtin schema name (census, health) or a YAML schema path")


def _add_data_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV file of categorical records")
    src.add_argument("--synthetic", choices=("uniform", "reference"),
                     help="generate records instead of reading a file")
    p.add_argument("--n-records", type=int, default=10000,
                   help="synthetic record count (default 10000)")
    p.add_argument("--data-seed", type=int, default=0,
                   help="seed for synthetic data generation (default 0)")
    p.add_argument("--column-map", default=None,
                   help="attr=column pairs, comma separated; column is a header name or 0-based index")
    p.add_argument("--on-error", choices=("skip", "abort"), default="skip",
                   help="row policy for unparseable input rows (default skip)")
    p.add_argument("--clamp", action="store_true",
                   help="clamp out-of-range numeric values into the boundary bins")


def _add_mechanism_args(p: argparse.ArgumentParser, multi: bool = False) -> None:
    if multi:
        p.add_argument("--mechanisms", default="det-gd,ran-gd,mask",
                       help=f"comma separated subset of {','.join(MECHANISMS)}")
    else:
        p.add_argument("--mechanism", required=True, choices=MECHANISMS)
    p.add_argument("--rho1", type=float, help="prior probability bound, in (0,1)")
    p.add_argument("--rho2", type=float, help="posterior probability bound, in (0,1)")
    p.add_argument("--gamma", type=float, help="matrix entry ratio bound (overrides rho pair)")
    p.add_argument("--alpha-frac", type=float, default=0.5,
                   help="randomized half-width as a fraction of the diagonal entry (default 0.5)")
    p.add_argument("--mask-p", type=float, default=None,
                   help="bit retention probability override (default: derived from gamma)")
    p.add_argument("--cp-k", type=int, default=3, help="cut-and-paste cut bound K (default 3)")
    p.add_argument("--cp-rho", type=float, default=0.494,
                   help="cut-and-paste paste probability (default 0.494)")


def _load_schema_arg(name_or_path: str) -> Schema:
    path = Path(name_or_path)
    if path.suffix in (".yaml", ".yml") or path.exists():
        return load_schema(path.read_text())
    return builtin_schema(name_or_path)


def _parse_column_map(text: str | None) -> dict[str, str | int] | None:
    if text is None:
        return None
    out: dict[str, str | int] = {}
    for pair in text.split(","):
        name, _, column = pair.partition("=")
        if not name or not column:
            raise ValueError(f"bad column map entry: {pair!r}")
        out[name.strip()] = int(column) if column.strip().lstrip("-").isdigit() else column.strip()
    return out


def _load_dataset(args, schema: Schema) -> Dataset:
    if args.input:
        return ingest_csv(
            args.input,
            schema,
            column_map=_parse_column_map(args.column_map),
            on_error=args.on_error,
            clamp=args.clamp,
        )
    if args.n_records <= 0:
        raise ValueError(f"need a positive record count, got {args.n_records}")
    if args.synthetic == "uniform":
        return generate_synthetic(schema, args.n_records, "uniform", args.data_seed)
    path = Path(args.schema)
    if path.exists():
        dist = load_reference_distribution(path.read_text(), schema)
    else:
        dist = builtin_distribution(args.schema)
    return generate_synthetic(schema, args.n_records, dist, args.data_seed)


def _gamma_value(args) -> float:
    if args.gamma is not None:
        if not args.gamma > 1:
            raise ValueError(f"gamma must exceed 1, got {args.gamma}")
        return args.gamma
    if args.rho1 is None or args.rho2 is None:
        raise ValueError("need either --gamma or both --rho1 and --rho2")
    return gamma_for(PrivacyTarget(args.rho1, args.rho2))


def _mask_p(args, gamma: float, schema: Schema) -> float:
    if args.mask_p is not None:
        return args.mask_p
    return mask_p_for_gamma(gamma, schema.n_attributes)


def _write_rows(path: Path, header: tuple[str, ...], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def _config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_privacy(args) -> int:
    if args.rho1 is not None and args.rho2 is not None:
        target = PrivacyTarget(args.rho1, args.rho2)
        gamma = args.gamma if args.gamma is not None else gamma_for(target)
    elif args.gamma is not None and args.rho1 is not None:
        gamma = args.gamma
    else:
        raise ValueError("need --rho1 with --rho2 (or --rho1 with --gamma)")
    posterior = worst_case_posterior(args.rho1, gamma)
    print(f"gamma = {gamma:.12g}")
    print(f"worst-case posterior = {posterior * 100:.4f}%")
    if args.domain_size is not None:
        low, high = posterior_range(args.rho1, gamma, args.alpha_frac, args.domain_size)
        print(
            f"posterior range at alpha = {args.alpha_frac:g}*gamma*x, "
            f"n = {args.domain_size}: [{low * 100:.4f}%, {high * 100:.4f}%]"
        )
    return EXIT_OK


def cmd_perturb(args) -> int:
    schema = _load_schema_arg(args.schema)
    data = _load_dataset(args, schema)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gamma = _gamma_value(args)
    base = GammaDiagonalSpec(gamma, schema)
    meta = {
        "mechanism": args.mechanism,
        "schema_name": schema.name,
        "schema_fingerprint": schema_fingerprint(schema),
        "n_records": data.n_records,
        "gamma": gamma,
        "x": base.x,
        "domain_size": base.n,
    }
    if args.mechanism == "det-gd":
        written = out / "perturbed.csv"
        write_csv(perturb_dataset(data, base, args.seed, args.threads), written)
    elif args.mechanism == "ran-gd":
        spec = RandomizedGammaSpec.from_fraction(base, args.alpha_frac)
        meta["alpha_fraction"] = args.alpha_frac
        meta["alpha"] = spec.alpha
        written = out / "perturbed.csv"
        write_csv(perturb_dataset(data, spec, args.seed, args.threads), written)
    elif args.mechanism == "mask":
        p = _mask_p(args, gamma, schema)
        meta["mask_p"] = p
        written = out / "perturbed_bits.csv"
        write_boolean_csv(mask_dataset(data, MaskSpec(p, schema), args.seed, args.threads), written)
    else:
        spec = CutPasteSpec(args.cp_k, args.cp_rho, schema)
        meta["cp_k"] = args.cp_k
        meta["cp_rho"] = args.cp_rho
        written = out / "perturbed_bits.csv"
        write_boolean_csv(cut_paste_dataset(data, spec, args.seed, args.threads), written)
    (out / "metadata.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(f"wrote {written} ({data.n_records} records) and metadata.json")
    return EXIT_OK


def _spec_from_metadata(meta: dict, schema: Schema):
    if meta["schema_fingerprint"] != schema_fingerprint(schema):
        raise ValueError("metadata was produced under a different schema")
    mechanism = meta["mechanism"]
    base = GammaDiagonalSpec(meta["gamma"], schema)
    if mechanism == "det-gd":
        return base
    if mechanism == "ran-gd":
        return RandomizedGammaSpec(base, meta["alpha"])
    if mechanism == "mask":
        return MaskSpec(meta["mask_p"], schema)
    if mechanism == "cut-paste":
        return CutPasteSpec(meta["cp_k"], meta["cp_rho"], schema)
    raise ValueError(f"unknown mechanism in metadata: {mechanism}")


def _write_mining_result(out: Path, result: MiningResult, schema: Schema, runtime: float) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for length in sorted(result.by_length):
        for itemset, support in result.by_length[length].items():
            rows.append((itemset_label(itemset, schema), length, support))
    _write_rows(out / "itemsets.csv", ("itemset", "length", "support"), rows)
    summary = {
        "mechanism": result.mechanism,
        "sup_min": result.sup_min,
        "counts_per_length": result.counts_per_length(),
        "n_itemsets": result.n_itemsets,
        "negative_estimates": result.negative_estimates,
        "runtime_s": round(runtime, 3),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")


def _read_mining_result(directory: Path, schema: Schema) -> MiningResult:
    summary = json.loads((directory / "summary.json").read_text())
    by_length: dict[int, dict] = {}
    with open(directory / "itemsets.csv", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)  # header
        for label, length, support in reader:
            itemset = parse_itemset(label, schema)
            by_length.setdefault(int(length), {})[itemset] = float(support)
    return MiningResult(
        by_length=by_length,
        sup_min=summary["sup_min"],
        mechanism=summary["mechanism"],
        negative_estimates=summary.get("negative_estimates", 0),
    )


def cmd_mine(args) -> int:
    schema = _load_schema_arg(args.schema)
    started = time.perf_counter()
    if args.metadata is None:
        data = ingest_csv(args.input, schema, column_map=_parse_column_map(args.column_map),
                          on_error=args.on_error, clamp=args.clamp)
        result = apriori_plain(data, args.sup_min)
    else:
        meta = json.loads(Path(args.metadata).read_text())
        spec = _spec_from_metadata(meta, schema)
        if isinstance(spec, (MaskSpec, CutPasteSpec)):
            perturbed: Dataset | BooleanDataset = read_boolean_csv(args.input, schema)
        else:
            perturbed = ingest_csv(args.input, schema)
        result = apriori_reconstructed(perturbed, schema, spec, args.sup_min)
    _write_mining_result(Path(args.out), result, schema, time.perf_counter() - started)
    counts = result.counts_per_length()
    print(f"{result.mechanism}: frequent itemsets per length {counts or '{}'} "
          f"({result.negative_estimates} negative estimates)")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    schema = _load_schema_arg(args.schema)
    found = _read_mining_result(Path(args.found), schema)
    truth = _read_mining_result(Path(args.truth), schema)
    report = accuracy_report(found, truth)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_rows(out / "accuracy.csv", ("mechanism", "length", "metric", "value"),
                report.to_csv_rows(found.mechanism))
    (out / "accuracy.json").write_text(report.to_json() + "\n")
    o = report.overall
    print(
        f"overall: support error {_fmt_pct(o.support_error_pct)}, "
        f"false positives {_fmt_pct(o.false_positive_pct)}, "
        f"false negatives {_fmt_pct(o.false_negative_pct)}, "
        f"strays {report.stray_found}"
    )
    return EXIT_OK


def _fmt_pct(value: float | None) -> str:
    return "undefined" if value is None else f"{value:.2f}%"


def _perturb_for(mechanism: str, data: Dataset, base: GammaDiagonalSpec, args, seed: int):
    """One mechanism run: returns (perturbed data, spec for the miner)."""
    if mechanism == "det-gd":
        return perturb_dataset(data, base, seed, args.threads), base
    if mechanism == "ran-gd":
        spec = RandomizedGammaSpec.from_fraction(base, args.alpha_frac)
        return perturb_dataset(data, spec, seed, args.threads), spec
    if mechanism == "mask":
        spec = MaskSpec(_mask_p(args, base.gamma, base.schema), base.schema)
        return mask_dataset(data, spec, seed, args.threads), spec
    if mechanism == "cut-paste":
        spec = CutPasteSpec(args.cp_k, args.cp_rho, base.schema)
        return cut_paste_dataset(data, spec, seed, args.threads), spec
    raise ValueError(f"unknown mechanism: {mechanism}")


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def _aggregate_reports(reports: list, lengths: list[int]) -> list[dict]:
    """Seed-mean of every per-length metric; None values are skipped and the
    number of seeds contributing to the support error is reported."""
    rows = []
    for length in lengths:
        per_seed = []
        for report in reports:
            try:
                per_seed.append(report.row(length))
            except KeyError:
                continue
        defined = [r.support_error_pct for r in per_seed if r.support_error_pct is not None]
        rows.append({
            "length": length,
            "support_error_pct": _mean(defined),
            "support_error_vs_true_pct": _mean(
                [r.support_error_vs_true_pct for r in per_seed
                 if r.support_error_vs_true_pct is not None]
            ),
            "false_positive_pct": _mean(
                [r.false_positive_pct for r in per_seed if r.false_positive_pct is not None]
            ),
            "false_negative_pct": _mean(
                [r.false_negative_pct for r in per_seed if r.false_negative_pct is not None]
            ),
            "n_found_mean": _mean([float(r.n_found) for r in per_seed]),
            "seeds_defined": len(defined),
        })
    return rows


def _condition_numbers(mechanism: str, base: GammaDiagonalSpec, args, schema: Schema) -> list[float]:
    """Reconstruction condition number per itemset length 1..M."""
    out = []
    for length in range(1, schema.n_attributes + 1):
        if mechanism in ("det-gd", "ran-gd"):
            sub = SubsetMarginalSpec.for_subset(base, tuple(range(length)))
            out.append(sub.condition_number())
        elif mechanism == "mask":
            out.append(mask_itemset_condition(length, _mask_p(args, base.gamma, schema)))
        else:
            spec = CutPasteSpec(args.cp_k, args.cp_rho, schema)
            out.append(condition_number(cut_paste_class_matrix(spec, length)))
    return out


def cmd_compare(args) -> int:
    schema = _load_schema_arg(args.schema)
    data = _load_dataset(args, schema)
    seeds = [int(s) for s in str(args.seeds).split(",") if s != ""]
    if not seeds:
        raise ValueError("need at least one seed")
    mechanisms = [m.strip() for m in args.mechanisms.split(",") if m.strip()]
    unknown = [m for m in mechanisms if m not in MECHANISMS]
    if unknown:
        raise ValueError(f"unknown mechanisms: {unknown}")
    gamma = _gamma_value(args)
    base = GammaDiagonalSpec(gamma, schema)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    truth = apriori_plain(data, args.sup_min)
    lengths = sorted(truth.by_length)
    support_rows, identity_rows, cond_rows = [], [], []
    summary_mechs = {}
    for mechanism in mechanisms:
        reports, negatives, runtimes = [], [], []
        for seed in seeds:
            started = time.perf_counter()
            perturbed, spec = _perturb_for(mechanism, data, base, args, seed)
            result = apriori_reconstructed(perturbed, schema, spec, args.sup_min)
            runtimes.append(time.perf_counter() - started)
            negatives.append(result.negative_estimates)
            reports.append(accuracy_report(result, truth))
        rows = _aggregate_reports(reports, lengths)
        for row in rows:
            support_rows.append((mechanism, row["length"], row["support_error_pct"],
                                 row["support_error_vs_true_pct"], row["seeds_defined"]))
            identity_rows.append((mechanism, row["length"], row["false_positive_pct"],
                                  row["false_negative_pct"], row["n_found_mean"]))
        for length, cond in zip(range(1, schema.n_attributes + 1),
                                _condition_numbers(mechanism, base, args, schema)):
            cond_rows.append((mechanism, length, cond))
        summary_mechs[mechanism] = {
            "support_error_pct": _mean(
                [r.overall.support_error_pct for r in reports
                 if r.overall.support_error_pct is not None]
            ),
            "false_positive_pct": _mean([r.overall.false_positive_pct for r in reports]),
            "false_negative_pct": _mean([r.overall.false_negative_pct for r in reports]),
            "stray_found_mean": _mean([float(r.stray_found) for r in reports]),
            "negative_estimates_mean": _mean([float(v) for v in negatives]),
            "runtime_s_mean": round(_mean(runtimes), 3),
        }

    _write_rows(out / "support_error.csv",
                ("mechanism", "length", "support_error_pct", "support_error_vs_true_pct",
                 "seeds_defined"), support_rows)
    _write_rows(out / "identity_error.csv",
                ("mechanism", "length", "false_positive_pct", "false_negative_pct",
                 "n_found_mean"), identity_rows)
    _write_rows(out / "cond_number.csv", ("mechanism", "length", "condition_number"), cond_rows)

    sweep_values = [float(a) for a in args.alpha_sweep.split(",")] if args.alpha_sweep else []
    if sweep_values:
        sweep_rows = []
        for frac in sweep_values:
            reports = []
            for seed in seeds:
                if frac == 0.0:
                    perturbed = perturb_dataset(data, base, seed, args.threads)
                    spec = base
                else:
                    spec = RandomizedGammaSpec.from_fraction(base, frac)
                    perturbed = perturb_dataset(data, spec, seed, args.threads)
                result = apriori_reconstructed(perturbed, schema, spec, args.sup_min)
                reports.append(accuracy_report(result, truth))
            low, high = posterior_range(
                args.rho1 if args.rho1 is not None else 0.05, gamma, frac, base.n
            )
            for row in _aggregate_reports(reports, lengths):
                sweep_rows.append((frac, row["length"], row["support_error_pct"],
                                   row["false_positive_pct"], row["false_negative_pct"],
                                   low * 100, high * 100))
        _write_rows(out / "alpha_sweep.csv",
                    ("alpha_fraction", "length", "support_error_pct", "false_positive_pct",
                     "false_negative_pct", "posterior_low_pct", "posterior_high_pct"),
                    sweep_rows)

    config = {
        "schema": args.schema,
        "input": args.input,
        "synthetic": args.synthetic,
        "n_records": data.n_records,
        "data_seed": args.data_seed,
        "gamma": gamma,
        "sup_min": args.sup_min,
        "seeds": seeds,
        "mechanisms": mechanisms,
        "alpha_fraction": args.alpha_frac,
        "mask_p": _mask_p(args, gamma, schema) if "mask" in mechanisms else None,
        "cp_k": args.cp_k,
        "cp_rho": args.cp_rho,
        "alpha_sweep": sweep_values,
    }
    summary = {
        "config": config,
        "config_hash": _config_hash(config),
        "schema_fingerprint": schema_fingerprint(schema),
        "gamma": gamma,
        "worst_case_posterior": worst_case_posterior(args.rho1, gamma)
        if args.rho1 is not None else None,
        "true_counts_per_length": truth.counts_per_length(),
        "mechanisms": summary_mechs,
    }
    if "ran-gd" in mechanisms and args.rho1 is not None:
        low, high = posterior_range(args.rho1, gamma, args.alpha_frac, base.n)
        summary["ran_gd_posterior_range"] = [low, high]
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"wrote comparison tables for {', '.join(mechanisms)} to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="privmine",
                     description="privacy-preserving mining over perturbed categorical data")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("privacy", help="gamma and posterior calculus for a privacy target")
    p.add_argument("--rho1", type=float, required=True)
    p.add_argument("--rho2", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--alpha-frac", type=float, default=0.5)
    p.add_argument("--domain-size", type=int, default=None,
                   help="domain size n for the randomized posterior range")
    p.set_defaults(func=cmd_privacy)

    p = sub.add_parser("perturb", help="perturb a dataset (client side)")
    _add_schema_arg(p)
    _add_data_args(p)
    _add_mechanism_args(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("mine", help="mine frequent itemsets with reconstruction (miner side)")
    _add_schema_arg(p)
    p.add_argument("--input", required=True, help="perturbed (or plain) dataset file")
    p.add_argument("--metadata", default=None,
                   help="metadata.json from perturb; omit to mine plain data directly")
    p.add_argument("--sup-min", type=float, required=True)
    p.add_argument("--column-map", default=None)
    p.add_argument("--on-error", choices=("skip", "abort"), default="skip")
    p.add_argument("--clamp", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("evaluate", help="compare a mining result against ground truth")
    _add_schema_arg(p)
    p.add_argument("--found", required=True, help="directory written by mine")
    p.add_argument("--truth", required=True, help="directory written by mine on plain data")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="multi-mechanism, multi-seed comparison tables")
    _add_schema_arg(p)
    _add_data_args(p)
    _add_mechanism_args(p, multi=True)
    p.add_argument("--sup-min", type=float, required=True)
    p.add_argument("--seeds", required=True, help="comma separated perturbation seeds")
    p.add_argument("--alpha-sweep", default=None,
                   help="comma separated alpha fractions for the randomized sweep table")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except np.linalg.LinAlgError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
