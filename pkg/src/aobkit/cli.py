"""Scenario-driven command line: `aobkit run <config>` plus inline subcommands.

A scenario is a JSON object with a symbol (or symbols), a frequency spec
(explicit list or generator), a list of named analyses with parameters, and an
output block.  Exit codes: 0 success, 2 configuration error, 3 analysis error.
Reruns with the same config and seed reproduce reports byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import aos, carleson, exponentials, kernels, projection, reports, schur, stability
from .errors import AobkitError, AnalysisFailed, ConfigInvalid

KNOWN_ANALYSES = ("gram_tails", "prop41", "stability", "projection", "carleson")
_ALIASES = {"gram+tails": "gram_tails", "gram": "gram_tails"}


def _load_json_arg(text: str, field: str):
    """Parse an inline JSON value; @path reads the file."""
    try:
        if text.startswith("@"):
            return json.loads(Path(text[1:]).read_text())
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(field, f"not readable JSON: {exc}") from exc


def parse_symbol(d, field: str) -> schur.SchurFunction:
    if not isinstance(d, dict):
        raise ConfigInvalid(field, "symbol must be an object")
    try:
        return schur.from_dict(d)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigInvalid(field, str(exc)) from exc


def parse_frequencies(spec, field: str) -> list:
    """Explicit [[re, im], ...] or one of the generator objects."""
    if isinstance(spec, list):
        out = []
        for k, pair in enumerate(spec):
            if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
                raise ConfigInvalid(f"{field}[{k}]", "expected [re, im]")
            out.append(complex(float(pair[0]), float(pair[1])))
        if not out:
            raise ConfigInvalid(field, "at least one frequency required")
        return out
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigInvalid(field, "expected a list or a single-key generator")
    kind, params = next(iter(spec.items()))
    if kind == "clark":
        for key in ("a", "count"):
            if key not in params:
                raise ConfigInvalid(f"{field}.clark.{key}", "missing")
        a = float(params["a"])
        if a <= 0:
            raise ConfigInvalid(f"{field}.clark.a", "must be > 0")
        alpha = float(params.get("alpha", 0.0))
        count = int(params["count"])
        return [complex((alpha + 2 * math.pi * n) / a, 0.0) for n in range(count)]
    if kind == "geometric":
        for key in ("r", "count"):
            if key not in params:
                raise ConfigInvalid(f"{field}.geometric.{key}", "missing")
        r = float(params["r"])
        count = int(params["count"])
        rule = params.get("imag_rule", "inverse_n")
        if rule == "inverse_n":
            imag = lambda n: 1.0 / n
        elif rule == "constant":
            value = float(params.get("imag_value", 1.0))
            imag = lambda n: value
        else:
            raise ConfigInvalid(f"{field}.geometric.imag_rule",
                                f"unknown rule {rule!r}")
        return [complex(r ** n, imag(n)) for n in range(1, count + 1)]
    if kind == "arithmetic":
        for key in ("start", "step", "count"):
            if key not in params:
                raise ConfigInvalid(f"{field}.arithmetic.{key}", "missing")
        imag = float(params.get("imag", 1.0))
        return [complex(float(params["start"]) + n * float(params["step"]), imag)
                for n in range(int(params["count"]))]
    raise ConfigInvalid(field, f"unknown generator {kind!r}")


def _require(config: dict, key: str, field: str):
    if key not in config:
        raise ConfigInvalid(field, "missing")
    return config[key]


# ---------------------------------------------------------------------------
# analyses: each returns a list of (filename, kind, payload) to be written


def _analysis_gram_tails(config, params, seed):
    b = parse_symbol(_require(config, "symbol", "symbol"), "symbol")
    freqs = parse_frequencies(_require(config, "frequencies", "frequencies"),
                              "frequencies")
    fam = kernels.kernel_family(b, freqs)
    gram = kernels.gram_normalized(fam)
    tails = aos.tail_report(gram)
    return [
        ("gram.csv", "csv", (reports.GRAM_HEADER, list(reports.gram_rows(gram)))),
        ("gram_meta.json", "json", reports.gram_sidecar(gram)),
        ("tails.csv", "csv", (reports.TAILS_HEADER, list(tails.rows))),
    ]


def _analysis_prop41(config, params, seed):
    freqs = parse_frequencies(_require(config, "frequencies", "frequencies"),
                              "frequencies")
    if "a" not in params:
        raise ConfigInvalid("analyses.prop41.a", "missing")
    rep = exponentials.prop41_check(freqs, float(params["a"]))
    summary = {
        "a": rep.a,
        "sup_im": rep.sup_im,
        "im_bounded_trend": rep.im_bounded_trend,
        "q_lower_bound": rep.q_lower_bound,
        "ratio_hypothesis": rep.ratio_hypothesis,
        "hypotheses_ok": rep.hypotheses_ok,
        "fit_constant": rep.fit_constant,
        "fit_residual": rep.fit_residual,
    }
    return [
        ("prop41.csv", "csv", (reports.PROP41_HEADER, list(rep.rows))),
        ("prop41_summary.json", "json", summary),
    ]


def _validated_weight_params(params, field: str) -> stability.WeightParams:
    p = params.get("p", 1.5)
    if not isinstance(p, (int, float)) or not 1.0 < float(p) < 2.0:
        raise ConfigInvalid(f"{field}.p", "p must lie in (1, 2)")
    return stability.WeightParams(p=float(p))


def _analysis_stability(config, params, seed):
    b = parse_symbol(_require(config, "symbol", "symbol"), "symbol")
    lams = parse_frequencies(_require(config, "frequencies", "frequencies"),
                             "frequencies")
    wp = _validated_weight_params(params, "analyses.stability")
    gamma = params.get("gamma")
    if gamma is not None and not float(gamma) > 1.0 / 3.0:
        raise ConfigInvalid("analyses.stability.gamma", "gamma must exceed 1/3")
    delta = params.get("cls_delta")
    if delta is not None and not 0.0 < float(delta) < 1.0:
        raise ConfigInvalid("analyses.stability.cls_delta",
                            "delta must lie in (0, 1)")
    eps = params.get("eps", 0.1)
    if "mu_frequencies" in params:
        mus = parse_frequencies(params["mu_frequencies"],
                                "analyses.stability.mu_frequencies")
        if len(mus) != len(lams):
            raise ConfigInvalid("analyses.stability.mu_frequencies",
                                "length mismatch with frequencies")
    elif "perturbation" in params:
        rule = params["perturbation"]
        if "shift" in rule:
            d = complex(rule["shift"][0], rule["shift"][1])
            mus = [l + d for l in lams]
        elif "radial" in rule:
            s = float(rule["radial"])
            mus = [l + 1j * s * l.imag if l.imag > 0 else l + s for l in lams]
        else:
            raise ConfigInvalid("analyses.stability.perturbation",
                                "expected shift or radial")
    else:
        raise ConfigInvalid("analyses.stability",
                            "needs mu_frequencies or perturbation")
    rep = stability.stability_report(b, lams, mus, wp,
                                     gamma=float(gamma) if gamma else None,
                                     eps=eps)
    return [
        ("stability.csv", "csv", (reports.STABILITY_HEADER,
                                  list(reports.stability_rows(rep)))),
        ("stability_eps_tail.csv", "csv", (("N", "eps_N"),
                                           list(reports.eps_tail_rows(rep)))),
    ]


def _analysis_projection(config, params, seed):
    symbols = _require(config, "symbols", "symbols")
    pair = projection.DivisorPair(
        parse_symbol(_require(symbols, "b2", "symbols.b2"), "symbols.b2"),
        parse_symbol(_require(symbols, "b", "symbols.b"), "symbols.b"))
    freqs = parse_frequencies(_require(config, "frequencies", "frequencies"),
                              "frequencies")
    tau = float(params.get("tau", 0.1))
    if not 0.0 < tau < 1.0:
        raise ConfigInvalid("analyses.projection.tau", "tau must lie in (0, 1)")
    rep = projection.division_report(pair, freqs, tau=tau)
    summary = {"l1_defect": rep.l1_defect, "tau": rep.tau,
               "estimated_p": rep.estimated_p}
    return [
        ("projection.csv", "csv", (reports.PROJECTION_HEADER, list(rep.rows))),
        ("projection_tails.csv", "csv", (reports.PROJECTION_TAILS_HEADER,
                                         list(rep.tails))),
        ("projection_summary.json", "json", summary),
    ]


def _analysis_carleson(config, params, seed):
    spec = _require(config, "measure", "measure")
    try:
        nu = carleson.measure_from_dict(spec)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigInvalid("measure", str(exc)) from exc
    constant = carleson.carleson_constant(nu)
    return [("carleson_summary.json", "json",
             {"constant": constant, "measure": carleson.measure_to_dict(nu)})]


_RUNNERS = {
    "gram_tails": _analysis_gram_tails,
    "prop41": _analysis_prop41,
    "stability": _analysis_stability,
    "projection": _analysis_projection,
    "carleson": _analysis_carleson,
}


def validate_scenario(config: dict) -> list:
    if not isinstance(config, dict):
        raise ConfigInvalid("", "scenario must be a JSON object")
    analyses = config.get("analyses")
    if not isinstance(analyses, list) or not analyses:
        raise ConfigInvalid("analyses", "a nonempty list is required")
    plan = []
    for k, entry in enumerate(analyses):
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigInvalid(f"analyses[{k}].name", "missing")
        name = _ALIASES.get(entry["name"], entry["name"])
        if name not in _RUNNERS:
            raise ConfigInvalid(f"analyses[{k}].name",
                                f"unknown analysis {entry['name']!r}; "
                                f"known: {', '.join(KNOWN_ANALYSES)}")
        params = {key: v for key, v in entry.items() if key != "name"}
        plan.append((name, params))
    return plan


def run_scenario(config: dict, out_dir, fmt: str = "csv", seed: int = 0,
                 parallel: bool = False) -> list:
    """Execute every analysis; returns the summary records.

    Raises ConfigInvalid before any work and AnalysisFailed (with the original
    error chained) if a module rejects its inputs at run time.
    """
    plan = validate_scenario(config)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def execute(item):
        name, params = item
        return name, _RUNNERS[name](config, params, seed)

    results = []
    if parallel and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=min(4, len(plan))) as pool:
            futures = [pool.submit(execute, item) for item in plan]
            for item, fut in zip(plan, futures):
                try:
                    results.append(fut.result())
                except ConfigInvalid:
                    raise
                except AobkitError as exc:
                    raise AnalysisFailed(f"{item[0]}: {exc}") from exc
    else:
        for item in plan:
            try:
                results.append(execute(item))
            except ConfigInvalid:
                raise
            except AobkitError as exc:
                raise AnalysisFailed(f"{item[0]}: {exc}") from exc

    # report writing is serialized regardless of how analyses ran
    records = []
    for name, files in results:
        written = []
        for fname, kind, payload in files:
            if kind == "csv" and fmt == "structured":
                header, rows = payload
                path = reports.write_json(
                    out_dir / (Path(fname).stem + ".json"),
                    [dict(zip(header, (None if isinstance(v, float) and math.isnan(v)
                                       else v for v in row))) for row in rows])
            elif kind == "csv":
                header, rows = payload
                path = reports.write_csv(out_dir / fname, header, rows)
            else:
                path = reports.write_json(out_dir / fname, payload)
            written.append(path.name)
        records.append({"analysis": name, "status": "ok", "files": written})
    summary = reports.run_summary(seed, fmt, records,
                                  reports.canonical_hash(config))
    reports.write_json(out_dir / "summary.json", summary)
    return records


def _error_record(exc: Exception) -> dict:
    return {"error": type(exc).__name__, "message": str(exc),
            **({"field": exc.field} if isinstance(exc, ConfigInvalid) else {})}


def _emit_error(exc: Exception, out_dir) -> None:
    record = _error_record(exc)
    sys.stderr.write(json.dumps(record) + "\n")
    if out_dir is not None:
        try:
            reports.write_json(Path(out_dir) / "error.json", record)
        except OSError:
            pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aobkit",
        description="Reproducing-kernel family diagnostics on the upper half-plane")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario configuration")
    run.add_argument("config", help="path to the scenario JSON")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--format", choices=("csv", "structured"), default="csv")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--parallel", action="store_true")

    def common(p, symbol=False, freqs=False):
        p.add_argument("--out", required=True)
        p.add_argument("--format", choices=("csv", "structured"), default="csv")
        p.add_argument("--seed", type=int, default=0)
        if symbol:
            p.add_argument("--symbol", required=True,
                           help="symbol JSON (inline or @file)")
        if freqs:
            p.add_argument("--frequencies", required=True,
                           help="frequency JSON (inline or @file)")

    g = sub.add_parser("gram", help="Gram matrix + tail bounds")
    common(g, symbol=True, freqs=True)

    st = sub.add_parser("stability", help="perturbation diagnostics")
    common(st, symbol=True, freqs=True)
    st.add_argument("--mu-frequencies", help="perturbed frequencies (JSON)")
    st.add_argument("--radial", type=float,
                    help="radial perturbation scale instead of explicit mus")
    st.add_argument("--p", type=float, default=1.5)
    st.add_argument("--gamma", type=float)
    st.add_argument("--eps", type=float, default=0.1)

    ex = sub.add_parser("exponentials", help="exponential-system hypotheses")
    common(ex, freqs=True)
    ex.add_argument("--a", type=float, required=True)

    pj = sub.add_parser("projection", help="divisor-pair transfer diagnostics")
    common(pj, freqs=True)
    pj.add_argument("--b2", required=True, help="divisor symbol JSON")
    pj.add_argument("--b", required=True, help="quotient symbol JSON")
    pj.add_argument("--tau", type=float, default=0.1)

    ca = sub.add_parser("carleson", help="Carleson constant of a measure")
    common(ca)
    ca.add_argument("--measure", required=True, help="measure JSON")
    return parser


def _config_from_args(args) -> dict:
    """Translate an inline subcommand into a one-analysis scenario."""
    if args.command == "gram":
        return {"symbol": _load_json_arg(args.symbol, "symbol"),
                "frequencies": _load_json_arg(args.frequencies, "frequencies"),
                "analyses": [{"name": "gram_tails"}]}
    if args.command == "stability":
        entry = {"name": "stability", "p": args.p, "eps": args.eps}
        if args.gamma is not None:
            entry["gamma"] = args.gamma
        if args.mu_frequencies:
            entry["mu_frequencies"] = _load_json_arg(args.mu_frequencies,
                                                     "mu_frequencies")
        elif args.radial is not None:
            entry["perturbation"] = {"radial": args.radial}
        else:
            raise ConfigInvalid("mu-frequencies",
                                "give --mu-frequencies or --radial")
        return {"symbol": _load_json_arg(args.symbol, "symbol"),
                "frequencies": _load_json_arg(args.frequencies, "frequencies"),
                "analyses": [entry]}
    if args.command == "exponentials":
        return {"frequencies": _load_json_arg(args.frequencies, "frequencies"),
                "analyses": [{"name": "prop41", "a": args.a}]}
    if args.command == "projection":
        return {"symbols": {"b2": _load_json_arg(args.b2, "b2"),
                            "b": _load_json_arg(args.b, "b")},
                "frequencies": _load_json_arg(args.frequencies, "frequencies"),
                "analyses": [{"name": "projection", "tau": args.tau}]}
    if args.command == "carleson":
        return {"measure": _load_json_arg(args.measure, "measure"),
                "analyses": [{"name": "carleson"}]}
    raise ConfigInvalid("command", f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = getattr(args, "out", None)
    try:
        if args.command == "run":
            try:
                config = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigInvalid("config", str(exc)) from exc
            run_scenario(config, args.out, fmt=args.format, seed=args.seed,
                         parallel=args.parallel)
        else:
            config = _config_from_args(args)
            run_scenario(config, args.out, fmt=args.format, seed=args.seed)
    except ConfigInvalid as exc:
        _emit_error(exc, out_dir)
        return 2
    except AobkitError as exc:
        _emit_error(exc, out_dir)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
