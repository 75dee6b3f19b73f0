"""Command line: ``twistl <command> [flags]``.

Every numeric command prints one JSON object (or CSV/text) on stdout with the
fields value_re, value_im, err_estimate, counters and config.  Diagnostics go
to stderr.  Exit codes: 0 success, 2 invalid configuration, 3 a verify check
out of tolerance.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass

from . import counters
from .assembly import PrecisionConfig, assemble_L, suggest_split
from .dirichlet import gauss_sum, parse_char_spec, split_character
from .errors import ToleranceExceeded, TwistlError
from .forms import CuspForm, delta_form, load_maass
from .oracle import BenchConfig, direct_integral_L, nearest_divisor_split, scaling_report
from .orbit_sum import SumRequest, fast_orbit_sums, naive_orbit_sum

COMMANDS = ("compute", "naive", "oracle", "orbit-sum", "gauss", "verify", "bench")


class ConfigError(TwistlError, ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    form: str = "delta"
    char: str | None = None
    split: str = "auto"
    s: complex = 0.5
    eps: float = 0.25
    gamma: float = 4.0
    output: str = "json"
    seed: int = 0
    threads: int | None = None
    t: float = 0.0
    l: int = 0
    bench: str | None = None

    def echo(self) -> dict:
        return {
            "command": self.command, "form": self.form, "char": self.char, "split": self.split,
            "s": [self.s.real, self.s.imag], "eps": self.eps, "gamma": self.gamma,
            "seed": self.seed, "t": self.t, "l": self.l,
        }


def parse_complex(text: str) -> complex:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse s={text!r}") from exc
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise ConfigError(f"cannot parse s={text!r}")


def parse_split(text: str, q: int) -> tuple[int, int]:
    if text == "auto":
        return suggest_split(q)
    try:
        M, N = (int(x) for x in text.lower().split("x"))
    except ValueError as exc:
        raise ConfigError(f"split must look like MxN, got {text!r}") from exc
    if M < 1 or N < 1 or M * N != q:
        raise ConfigError(f"split {M}x{N} does not multiply to q = {q}")
    return M, N


def load_form(spec: str) -> CuspForm:
    if spec == "delta":
        return delta_form()
    if spec.startswith("maass:"):
        return load_maass(spec[len("maass:"):])
    raise ConfigError(f"unknown form {spec!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twistl", description="Twisted L-values of level-one cusp forms.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--form", default="delta", help="delta | maass:<path>")
    p.add_argument("--char", help="character as q:label (Conrey)")
    p.add_argument("--split", default="auto", help="MxN with MN = q, or auto")
    p.add_argument("--s", default="0.5,0", help="evaluation point re,im")
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--gamma", type=float, default=4.0)
    p.add_argument("--output", choices=("json", "csv", "text"), default="json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--t", type=float, default=0.0, help="orbit-sum height parameter")
    p.add_argument("--l", type=int, default=0, help="orbit-sum derivative order")
    p.add_argument("--bench", default=None, help="q:MxN,... (default q = 6^j, j = 2..5)")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    threads = ns.threads
    env = os.environ.get("TWISTL_THREADS")
    if env:
        try:
            threads = int(env)
        except ValueError as exc:
            raise ConfigError(f"TWISTL_THREADS={env!r} is not an integer") from exc
    if threads is not None and threads < 1:
        raise ConfigError("threads must be positive")
    cfg = RunConfig(
        ns.command, ns.form, ns.char, ns.split, parse_complex(ns.s), ns.eps, ns.gamma,
        ns.output, ns.seed, threads, ns.t, ns.l, ns.bench,
    )
    if cfg.command in ("compute", "naive", "oracle", "orbit-sum", "gauss") and not cfg.char:
        raise ConfigError(f"{cfg.command} needs --char q:label")
    if not 0 < cfg.eps <= 0.5:
        raise ConfigError("--eps must lie in (0, 1/2]")
    if cfg.gamma <= 0:
        raise ConfigError("--gamma must be positive")
    return cfg


# -- commands --------------------------------------------------------------------


def _result(value: complex, err: float, counts: dict, cfg: RunConfig, **extra) -> dict:
    out = {
        "value_re": value.real,
        "value_im": value.imag,
        "err_estimate": err,
        "counters": counts,
        "config": cfg.echo(),
    }
    out.update(extra)
    return out


def _precision(cfg: RunConfig) -> PrecisionConfig:
    return PrecisionConfig(gamma_prec=cfg.gamma, eps=cfg.eps, s=cfg.s)


def cmd_compute(cfg: RunConfig, engine: str) -> dict:
    form, chi = load_form(cfg.form), parse_char_spec(cfg.char)
    split = parse_split(cfg.split, chi.modulus)
    res = assemble_L(form, chi, _precision(cfg), engine=engine, split=split, threads=cfg.threads)
    return _result(res.value, res.err_estimate, res.counts, cfg, route=res.route.value,
                   split=list(split) if engine == "fast" else None)


def cmd_oracle(cfg: RunConfig) -> dict:
    form, chi = load_form(cfg.form), parse_char_spec(cfg.char)
    with counters.counting() as cnt:
        val = direct_integral_L(form, chi, cfg.s, cfg.gamma)
    return _result(val, 10.0 ** (-cfg.gamma) * abs(val), cnt.snapshot(), cfg)


def cmd_orbit_sum(cfg: RunConfig) -> dict:
    form, chi = load_form(cfg.form), parse_char_spec(cfg.char)
    M, N = parse_split(cfg.split, chi.modulus)
    split = split_character(chi, M, N)
    with counters.counting() as cnt:
        res = fast_orbit_sums(
            SumRequest(form, split, cfg.t, cfg.l, cfg.eps, cfg.gamma + 4, threads=cfg.threads)
        )
    fast_counts = cnt.snapshot()
    naive = naive_orbit_sum(form, chi, chi.modulus, cfg.t, cfg.l)
    value = complex(res.values[cfg.l])
    return _result(
        value, res.max_residual, fast_counts, cfg,
        naive_re=naive.real, naive_im=naive.imag, boxes=res.boxes, weight_ids=res.weight_ids,
        degree=res.degree, split=[M, N],
    )


def cmd_gauss(cfg: RunConfig) -> dict:
    chi = parse_char_spec(cfg.char)
    with counters.counting() as cnt:
        val = gauss_sum(chi)
    return _result(val, 0.0, cnt.snapshot(), cfg, primitive=chi.primitive)


def cmd_bench(cfg: RunConfig) -> dict:
    if cfg.bench:
        cases = []
        for item in cfg.bench.split(","):
            q_s, sp = item.split(":")
            q = int(q_s)
            cases.append((q,) + parse_split(sp, q))
    else:
        cases = [(6**j,) + nearest_divisor_split(6**j) for j in range(2, 6)]
    report = scaling_report(cases, load_form(cfg.form), BenchConfig(t=cfg.t, l=cfg.l, eps=cfg.eps, threads=cfg.threads))
    return {"report": report, "config": cfg.echo()}


def cmd_verify(cfg: RunConfig) -> dict:
    from .verify import run_suite

    checks = run_suite(cfg.seed, threads=cfg.threads)
    return {"checks": checks, "passed": all(c["passed"] for c in checks), "config": cfg.echo()}


# -- output -----------------------------------------------------------------------


def render(result: dict, fmt: str) -> str:
    if "report" in result:
        rep = result["report"]
        if fmt == "csv":
            return rep.to_csv()
        if fmt == "json":
            data = json.loads(rep.to_json())
            data["config"] = result["config"]
            return json.dumps(data, indent=2, sort_keys=True) + "\n"
        return "\n".join(
            f"q={r.q} M={r.M} N={r.N} lift_evals={r.lift_evals} evals/q={r.evals_per_q:.4g} rel_dev={r.rel_dev}"
            for r in rep.rows
        ) + "\n"
    if "checks" in result:
        if fmt == "json":
            return json.dumps(result, indent=2, sort_keys=True) + "\n"
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["check", "passed", "value", "tolerance"])
            for c in result["checks"]:
                w.writerow([c["name"], c["passed"], repr(c["value"]), repr(c["tolerance"])])
            return buf.getvalue()
        return "\n".join(
            f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['value']:.3e} (tol {c['tolerance']:.1e})"
            for c in result["checks"]
        ) + "\n"
    if fmt == "json":
        return json.dumps(result, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = ["value_re", "value_im", "err_estimate"] + sorted(result["counters"])
        w.writerow(keys)
        row = [repr(result[k]) for k in keys[:3]] + [result["counters"][k] for k in keys[3:]]
        w.writerow(row)
        return buf.getvalue()
    return (
        f"value = {result['value_re']!r} + {result['value_im']!r}i\n"
        f"err_estimate = {result['err_estimate']:.3e}\n"
    )


def run(argv: list[str] | None = None) -> tuple[int, str]:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already wrote the message
        return (0 if exc.code == 0 else 2), ""
    try:
        cfg = config_from_args(ns)
        handlers = {
            "compute": lambda: cmd_compute(cfg, "fast"),
            "naive": lambda: cmd_compute(cfg, "naive"),
            "oracle": lambda: cmd_oracle(cfg),
            "orbit-sum": lambda: cmd_orbit_sum(cfg),
            "gauss": lambda: cmd_gauss(cfg),
            "verify": lambda: cmd_verify(cfg),
            "bench": lambda: cmd_bench(cfg),
        }
        result = handlers[cfg.command]()
        text = render(result, cfg.output)
    except ToleranceExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3, ""
    except (TwistlError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, ""
    if "checks" in result and not result["passed"]:
        return 3, text
    return 0, text


def main(argv: list[str] | None = None) -> int:
    code, text = run(argv)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
