"""Command-line front end: closed forms, estimators, identity sweeps, reports.

Output is a record stream (JSON lines or CSV) whose first record is the run
manifest; all numeric payload below the manifest is reproduced byte for byte
by any rerun with an equal manifest, independent of the worker count.
Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 bound or
identity violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, closedform, identities, montecarlo
from .entangle import average_embedded_entanglement
from .errors import SubentError

ENV_PREFIX = "SUBENT_"
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VIOLATION = 3

QUADRATURE_ALPHAS = (1.0, 1.5, 2.0, 3.0)
_DEFAULT_EPS = "0.05,0.1,0.2"


class UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); route to exit code 1
        raise UsageError(message)


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility header embedded at the top of every result stream."""

    command: str
    parameters: dict
    seed: int
    chunk: int
    started: str
    finished: str
    tool_version: str

    def as_record(self) -> dict:
        return {
            "record": "manifest",
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "chunk": self.chunk,
            "started": self.started,
            "finished": self.finished,
            "tool_version": self.tool_version,
        }


# ----------------------------------------------------------------------------
# serialization: floats always carry 17 significant digits


def _fmt_float(value: float) -> str:
    return format(float(value), ".17g")


def _json_value(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt_float(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        body = ",".join(f"{json.dumps(str(k))}:{_json_value(v)}" for k, v in value.items())
        return "{" + body + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_json_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value)!r}")


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt_float(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    text = str(value)
    if any(ch in text for ch in ",\"\n"):
        text = '"' + text.replace('"', '""') + '"'
    return text


def _emit(stream, manifest: RunManifest, rows: list[dict], fmt: str) -> None:
    if fmt == "json":
        stream.write(_json_value(manifest.as_record()) + "\n")
        for row in rows:
            stream.write(_json_value(row) + "\n")
        return
    stream.write("# manifest: " + _json_value(manifest.as_record()) + "\n")
    fields: list[str] = []
    for row in rows:
        for key in row:
            if key not in fields:
                fields.append(key)
    stream.write(",".join(fields) + "\n")
    for row in rows:
        stream.write(",".join(_csv_cell(row.get(key)) for key in fields) + "\n")


# ----------------------------------------------------------------------------
# settings: flag > environment > config file > default


def _load_config(path: str) -> dict:
    settings: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as handle:
            for raw in handle:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"malformed config line: {line!r}")
                key, _, value = line.partition("=")
                settings[key.strip()] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    return settings


def _resolve(flag_value, env_name, config: dict, key: str, default, cast):
    if flag_value is not None:
        return flag_value
    if env_name is not None:
        env_value = os.environ.get(ENV_PREFIX + env_name)
        if env_value is not None:
            try:
                return cast(env_value)
            except ValueError as exc:
                raise UsageError(f"bad {ENV_PREFIX}{env_name}: {env_value!r}") from exc
    if key in config:
        try:
            return cast(config[key])
        except ValueError as exc:
            raise UsageError(f"bad config value for {key}: {config[key]!r}") from exc
    return default


def _parse_range(text: str) -> list[int]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise UsageError(f"ranges look like A..B, got {text!r}")
    try:
        lo_i, hi_i = int(lo), int(hi)
    except ValueError as exc:
        raise UsageError(f"ranges need integer endpoints, got {text!r}") from exc
    if lo_i > hi_i or lo_i < 1:
        raise UsageError(f"empty or invalid range {text!r}")
    return list(range(lo_i, hi_i + 1))


def _parse_eps(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"bad epsilon list {text!r}") from exc
    if not values or any(e <= 0 for e in values):
        raise UsageError("epsilons must be a comma list of positive numbers")
    return values


def _z_score(mean: float, target: float, stderr: float) -> float:
    if stderr == 0.0:
        if mean == target:
            return 0.0
        return float("inf") if mean > target else float("-inf")
    return (mean - target) / stderr


# ----------------------------------------------------------------------------
# commands


def _cmd_formula(args, settings) -> tuple[list[dict], bool, dict]:
    if args.m_range or args.n_range:
        ms = _parse_range(args.m_range) if args.m_range else [args.m]
        ns = _parse_range(args.n_range) if args.n_range else [args.n]
        if None in ms or None in ns:
            raise UsageError("sweeps need both --m/--m-range and --n/--n-range")
        pairs = [(m, n) for m in ms for n in ns if m <= n]
    else:
        if args.m is None or args.n is None:
            raise UsageError("formula needs --m and --n (or ranges)")
        if args.m < 1:
            raise UsageError("--m must be >= 1")
        if args.m > args.n:
            raise UsageError("need m <= n")
        pairs = [(args.m, args.n)]
    rows = []
    for m, n in pairs:
        sub = closedform.average_subentropy_exact(m, n)
        ent = closedform.average_entropy_exact(m, n)
        coh = closedform.average_coherence_exact(m, n)
        series = closedform.average_subentropy_series(m, n - m + 1)
        assembly = (closedform.harmonic(m) - 1) + sub - ent - coh
        rows.append(
            {
                "record": "formula",
                "m": m,
                "n": n,
                "avg_subentropy": str(sub),
                "avg_subentropy_float": float(sub),
                "avg_entropy": str(ent),
                "avg_entropy_float": float(ent),
                "avg_coherence": str(coh),
                "avg_coherence_float": float(coh),
                "series": str(series.exact),
                "series_float": series.approx,
                "series_residual": str(series.exact - sub),
                "consistency_residual": str(assembly),
            }
        )
    params = {
        "m": args.m,
        "n": args.n,
        "m_range": args.m_range,
        "n_range": args.n_range,
        "format": settings["format"],
    }
    return rows, False, params


_TARGETS = {
    "entropy": closedform.average_entropy_exact,
    "subentropy": closedform.average_subentropy_exact,
    "coherence": closedform.average_coherence_exact,
}


def _cmd_estimate(args, settings) -> tuple[list[dict], bool, dict]:
    if args.m is None or args.n is None:
        raise UsageError("estimate needs --m and --n")
    if args.m < 1:
        raise UsageError("--m must be >= 1")
    if args.m > args.n:
        raise UsageError("need m <= n")
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    whichs = list(_TARGETS) if args.which == "all" else [args.which]
    rows = []
    for which in whichs:
        est = montecarlo.estimate_functional(
            args.m, args.n, which, args.samples, settings["seed"],
            chunk=settings["chunk"], workers=settings["workers"],
        )
        target = _TARGETS[which](args.m, args.n)
        rows.append(
            {
                "record": "estimate",
                "which": which,
                "m": args.m,
                "n": args.n,
                "samples": args.samples,
                "mean": est.mean,
                "variance": est.variance,
                "stderr": est.stderr,
                "count": est.count,
                "target": str(target),
                "target_float": float(target),
                "z": _z_score(est.mean, float(target), est.stderr),
            }
        )
    params = {
        "m": args.m,
        "n": args.n,
        "samples": args.samples,
        "which": args.which,
        "format": settings["format"],
    }
    return rows, False, params


def _cmd_concentration(args, settings) -> tuple[list[dict], bool, dict]:
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    rows: list[dict] = []
    violation = False
    if args.m_range:
        ms = _parse_range(args.m_range)
        if any(m < 2 for m in ms):
            raise UsageError("sweep dimensions must be >= 2")
        for row in montecarlo.concentration_sweep(
            ms, args.samples, settings["seed"],
            chunk=settings["chunk"], workers=settings["workers"],
        ):
            rows.append(
                {
                    "record": "concentration",
                    "m": row.m,
                    "n": row.m,
                    "samples": args.samples,
                    "mean": row.mean,
                    "stddev": row.stddev,
                    "stderr": row.stderr,
                    "count": row.count,
                    "target_float": row.target,
                }
            )
    else:
        if args.m is None or args.n is None:
            raise UsageError("concentration needs --m and --n, or --m-range")
        if args.m < 3:
            raise UsageError("the tail bound needs m >= 3")
        if args.m > args.n:
            raise UsageError("need m <= n")
        reports = montecarlo.tail_experiment(
            args.m, args.n, _parse_eps(args.eps), args.samples, settings["seed"],
            chunk=settings["chunk"], workers=settings["workers"],
        )
        for report in reports:
            ok = report.empirical_fraction <= min(1.0, report.levy_bound)
            violation |= not ok
            rows.append(
                {
                    "record": "tail",
                    "m": args.m,
                    "n": args.n,
                    "epsilon": report.epsilon,
                    "center": report.center,
                    "empirical_fraction": report.empirical_fraction,
                    "levy_bound": report.levy_bound,
                    "count": report.count,
                    "ok": ok,
                }
            )
    params = {
        "m": args.m,
        "n": args.n,
        "m_range": args.m_range,
        "eps": args.eps,
        "samples": args.samples,
        "format": settings["format"],
    }
    return rows, violation, params


def _cmd_identities(args, settings) -> tuple[list[dict], bool, dict]:
    rows: list[dict] = []
    violation = False
    for m in range(1, args.max_m + 1):
        for n in range(m, args.max_n + 1):
            for report in (
                identities.gamma_ratio_sum_plain(m, n),
                identities.gamma_ratio_sum_harmonic(m, n),
                identities.riordan_identity_check(m, n),
            ):
                violation |= not report.holds
                rows.append(
                    {
                        "record": "identity",
                        "name": report.name,
                        "m": m,
                        "n": n,
                        "lhs": str(report.lhs),
                        "rhs": str(report.rhs),
                        "holds": report.holds,
                    }
                )
    if args.quadrature:
        for m in sorted(identities.QUADRATURE_TARGETS):
            tolerance = identities.QUADRATURE_TARGETS[m]
            for alpha in QUADRATURE_ALPHAS:
                checks = [("selberg_simplex", None, identities.selberg_quadrature_oracle(m, alpha),
                           closedform.normalization_integral(m, alpha, 1.0))]
                for k in range(1, m + 1):
                    checks.append(
                        (
                            "aomoto_moment",
                            k,
                            identities.aomoto_quadrature_oracle(m, k, alpha),
                            identities.aomoto_moment_closed(m, k, alpha),
                        )
                    )
                for name, k, value, closed in checks:
                    rel = abs(value - closed) / abs(closed)
                    ok = rel <= tolerance
                    violation |= not ok
                    rows.append(
                        {
                            "record": "quadrature",
                            "name": name,
                            "m": m,
                            "k": k,
                            "alpha": alpha,
                            "value": value,
                            "closed_form": closed,
                            "rel_error": rel,
                            "tolerance": tolerance,
                            "ok": ok,
                        }
                    )
    params = {
        "max_m": args.max_m,
        "max_n": args.max_n,
        "quadrature": bool(args.quadrature),
        "format": settings["format"],
    }
    return rows, violation, params


def _cmd_entangle(args, settings) -> tuple[list[dict], bool, dict]:
    if args.m is None or args.n is None:
        raise UsageError("entangle needs --m and --n")
    if args.m < 3:
        raise UsageError("the embedded average needs m >= 3")
    if args.m > args.n:
        raise UsageError("need m <= n")
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    est = average_embedded_entanglement(
        args.m, args.n, args.samples, settings["seed"],
        chunk=settings["chunk"], workers=settings["workers"],
    )
    target = closedform.average_coherence_exact(args.m, args.n)
    rows = [
        {
            "record": "entanglement",
            "m": args.m,
            "n": args.n,
            "samples": args.samples,
            "mean": est.mean,
            "variance": est.variance,
            "stderr": est.stderr,
            "count": est.count,
            "target": str(target),
            "target_float": float(target),
            "z": _z_score(est.mean, float(target), est.stderr),
        }
    ]
    violation = False
    reports = montecarlo.tail_experiment(
        args.m, args.n, _parse_eps(args.eps), args.samples, settings["seed"],
        chunk=settings["chunk"], workers=settings["workers"],
    )
    for report in reports:
        ok = report.empirical_fraction <= min(1.0, report.levy_bound)
        violation |= not ok
        rows.append(
            {
                "record": "tail",
                "m": args.m,
                "n": args.n,
                "epsilon": report.epsilon,
                "center": report.center,
                "empirical_fraction": report.empirical_fraction,
                "levy_bound": report.levy_bound,
                "count": report.count,
                "ok": ok,
            }
        )
    params = {
        "m": args.m,
        "n": args.n,
        "samples": args.samples,
        "eps": args.eps,
        "format": settings["format"],
    }
    return rows, violation, params


_COMMANDS = {
    "formula": _cmd_formula,
    "estimate": _cmd_estimate,
    "concentration": _cmd_concentration,
    "identities": _cmd_identities,
    "entangle": _cmd_entangle,
}


# ----------------------------------------------------------------------------
# wiring


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base RNG seed")
    common.add_argument("--chunk", type=int, default=None, help="samples per RNG stream")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--out", default=None, help="write records to this file")
    common.add_argument("--workers", type=int, default=None, help="worker processes")
    common.add_argument("--config", default=None, help="key=value settings file")

    parser = _Parser(prog="subent", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("formula", parents=[common], help="closed-form averages")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--m-range", dest="m_range")
    p.add_argument("--n-range", dest="n_range")

    p = sub.add_parser("estimate", parents=[common], help="Monte Carlo vs closed forms")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--which", choices=("entropy", "subentropy", "coherence", "all"), default="all")

    p = sub.add_parser("concentration", parents=[common], help="tail fractions vs bounds")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--m-range", dest="m_range", help="sweep stddev over m with n = m")
    p.add_argument("--eps", default=_DEFAULT_EPS)
    p.add_argument("--samples", type=int, default=10000)

    p = sub.add_parser("identities", parents=[common], help="exact identity sweeps")
    p.add_argument("--max-m", dest="max_m", type=int, default=20)
    p.add_argument("--max-n", dest="max_n", type=int, default=20)
    p.add_argument("--quadrature", action="store_true")

    p = sub.add_parser("entangle", parents=[common], help="embedded entanglement averages")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--eps", default=_DEFAULT_EPS)

    return parser


def _timestamp() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required (formula, estimate, "
                             "concentration, identities, entangle)")
        config = _load_config(args.config) if args.config else {}
        settings = {
            "seed": _resolve(args.seed, "SEED", config, "seed", 0, int),
            "chunk": _resolve(args.chunk, None, config, "chunk", montecarlo.DEFAULT_CHUNK, int),
            "format": _resolve(args.format, "FORMAT", config, "format", "json", str),
            "workers": _resolve(args.workers, "WORKERS", config, "workers",
                                os.cpu_count() or 1, int),
        }
        if settings["format"] not in ("json", "csv"):
            raise UsageError(f"unknown format {settings['format']!r}")
        if settings["seed"] < 0 or settings["seed"] >= 2**64:
            raise UsageError("--seed must fit in an unsigned 64-bit integer")
        if settings["chunk"] < 1:
            raise UsageError("--chunk must be >= 1")
        if settings["workers"] < 1:
            raise UsageError("--workers must be >= 1")
        started = _timestamp()
        rows, violation, params = _COMMANDS[args.command](args, settings)
        manifest = RunManifest(
            args.command, params, settings["seed"], settings["chunk"],
            started, _timestamp(), __version__,
        )
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as stream:
                _emit(stream, manifest, rows, settings["format"])
        else:
            _emit(sys.stdout, manifest, rows, settings["format"])
        return EXIT_VIOLATION if violation else EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SubentError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
