"""Command-line front end.

Every command prints a short summary on stdout and, with ``--out PATH``, writes a
machine-readable report (``--out -`` sends the report to stdout instead of the
summary). Reports carry the fully resolved configuration.

Parameter precedence: command-line flag, then ``FAREYGAUSS_<NAME>`` environment
variable (e.g. ``FAREYGAUSS_N=80``), then the built-in default.

Exit codes: 0 ok, 2 invalid input, 3 numerical failure (including a failed
``verify`` residual).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import _backend, cf_dynamics, measures, records, transfer_ops, zeta
from .specfun import build_rule

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3

DEFAULTS = {
    "z": "1",
    "s": "0.5",
    "q": 0,
    "N": 60,
    "kmax": 200,
    "nmax": 10_000,
    "Lmax": 4,
    "lambda": "1",
    "seed": 0,
    "format": "json",
    "threads": None,
}
CASTS = {"z": str, "s": str, "q": int, "N": int, "kmax": int, "nmax": int, "Lmax": int,
         "lambda": str, "seed": int, "format": str, "threads": int}


class ValidationError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    z: complex
    s: complex
    q: int
    N: int
    kmax: int
    nmax: int
    Lmax: int
    lam: complex
    seed: int
    out: str | None
    format: str
    threads: int | None

    def to_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


def _parse_complex(name, text) -> complex:
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError as exc:
        raise ValidationError(f"--{name}: cannot parse {text!r} as a number") from exc


def resolve_config(args: argparse.Namespace) -> RunConfig:
    vals = {}
    for name, default in DEFAULTS.items():
        v = getattr(args, name.replace("lambda", "lam"), None)
        if v is None:
            env = os.environ.get(f"FAREYGAUSS_{name.upper()}")
            if env is not None:
                try:
                    v = CASTS[name](env)
                except ValueError as exc:
                    raise ValidationError(f"FAREYGAUSS_{name.upper()}={env!r} is invalid") from exc
        vals[name] = default if v is None else v
    for name in ("N", "kmax", "nmax", "Lmax"):
        if vals[name] <= 0:
            raise ValidationError(f"--{name} must be positive")
    if vals["q"] < 0:
        raise ValidationError("--q must be non-negative")
    if vals["threads"] is not None and vals["threads"] <= 0:
        raise ValidationError("--threads must be positive")
    if vals["format"] not in ("json", "csv"):
        raise ValidationError("--format must be json or csv")
    return RunConfig(
        command=args.command,
        z=_parse_complex("z", vals["z"]),
        s=_parse_complex("s", vals["s"]),
        q=vals["q"],
        N=vals["N"],
        kmax=vals["kmax"],
        nmax=vals["nmax"],
        Lmax=vals["Lmax"],
        lam=_parse_complex("lambda", vals["lambda"]),
        seed=vals["seed"],
        out=args.out,
        format=vals["format"],
        threads=vals["threads"],
    )


def _fmt(c) -> str:
    c = complex(c)
    if c.imag == 0:
        return f"{c.real:.17g}"
    return f"{c.real:.17g}{c.imag:+.17g}j"


def _rule(cfg: RunConfig):
    if not 4 <= cfg.N <= 512:
        raise ValidationError("--N must be in [4, 512]")
    return build_rule("m", cfg.N)


def _check_off_cut(z: complex):
    if transfer_ops.on_cut(z):
        raise ValidationError(f"z={_fmt(z)} lies on the cut (1, inf); pick z off the real ray z > 1")


# ---------------------------------------------------------------------------
# Commands: each returns (summary lines, report object)
# ---------------------------------------------------------------------------


def cmd_spectrum(cfg: RunConfig, args):
    _check_off_cut(cfg.z)
    rule = _rule(cfg)
    if args.operator == "kzq":
        if cfg.q > 2:
            raise ValidationError("--q must be 0, 1 or 2")
        op = transfer_ops.build_Kzq(cfg.z, cfg.q, rule)
    elif args.operator == "T":
        op = transfer_ops.build_T(rule)
    else:
        op = transfer_ops.build_M(rule)
    sp = transfer_ops.spectrum(op, vectors=False)
    dist = float(np.min(np.abs(sp.eigenvalues - cfg.lam)))
    lines = [f"operator={args.operator} z={_fmt(cfg.z)} q={cfg.q} N={cfg.N}"]
    lines += [f"lambda_{i} = {_fmt(e)}" for i, e in enumerate(sp.eigenvalues[:5])]
    lines.append(f"distance from --lambda {_fmt(cfg.lam)} to the spectrum = {dist:.3e}")
    return lines, {"spectrum": sp.to_dict(), "distance_to_lambda": dist}


def cmd_zeta(cfg: RunConfig, args):
    z = cfg.z
    if z.imag == 0 and z.real > 1:
        raise ValidationError(f"z={_fmt(z)} lies on the cut (1, inf)")
    rule = _rule(cfg)
    det0 = zeta.fredholm_det(cfg.s, z, 0, rule=rule)
    det1 = zeta.fredholm_det(cfg.s, z, 1, rule=rule)
    z2 = zeta.zeta2(cfg.s, z, rule)
    report = {"det_q0": det0, "det_q1": det1, "zeta2": z2}
    lines = [f"zeta2(s={_fmt(cfg.s)}, z={_fmt(z)}) = {_fmt(z2)}",
             f"det(1 - s K_(z,0)) = {_fmt(det0)}", f"det(1 - s K_(z,1)) = {_fmt(det1)}"]
    if abs(z) <= 1:
        ser = zeta.zeta2_log_series(z, cfg.Lmax, cfg.kmax)
        report["log_zeta2_series"] = ser.to_dict()
        lines.append("log zeta2 coefficients (orbit route): "
                     + ", ".join(_fmt(c) for c in ser.coeffs[1:]))
    if args.farey_order:
        zf = zeta.zeta_F_series(args.farey_order)
        report["zeta_F_series"] = zf.to_dict()
        lines.append("zeta_F coefficients: " + ", ".join(_fmt(c) for c in zf.coeffs))
    return lines, report


def cmd_trace(cfg: RunConfig, args):
    if abs(cfg.z) > 1:
        raise ValidationError("trace sums need |z| <= 1")
    tab = zeta.trace_table(cfg.z, cfg.Lmax, cfg.kmax)
    lines = [f"ell={e} q={q} tr={_fmt(v)} tail<={t:.3g}" for e, q, v, t in tab.rows]
    return lines, tab


def cmd_verify(cfg: RunConfig, args):
    if abs(cfg.z) > 1:
        raise ValidationError("identity checks need |z| <= 1")
    grid = np.linspace(0.02, 1.0, 50)
    funcs = {
        "1/(1+w)": lambda w: 1 / (1 + w),
        "exp(-w)": lambda w: np.exp(-w),
        "h": measures.density_h,
    }
    reports = []
    for name, f in funcs.items():
        for check in (transfer_ops.verify_identity_first, transfer_ops.verify_identity_second):
            r = check(cfg.z, f, grid, cfg.nmax)
            reports.append({"f": name, **r.to_dict()})
    x = np.linspace(0.01, 1.0, 100)
    pe = float(np.max(np.abs(transfer_ops.apply_P(measures.density_e, x) - measures.density_e(x))))
    reports.append({"f": "e", "name": "P e = e", "max_residual": pe, "tail_budget": 1e-12,
                    "passed": pe <= 1e-12})
    qh = transfer_ops.apply_Qz(measures.density_h, x, 1.0, cfg.nmax)
    r = float(np.max(np.abs(qh.value - measures.density_h(x))))
    reports.append({"f": "h", "name": "Q h = h", "max_residual": r, "tail_budget": qh.tail_bound,
                    "passed": r <= qh.tail_bound + transfer_ops.RESIDUAL_SLACK})
    ok = all(r["passed"] for r in reports)
    lines = [f"{r['name']:>9} f={r['f']:<8} residual={r['max_residual']:.3e} "
             f"budget={r['tail_budget']:.3e} {'ok' if r['passed'] else 'FAIL'}" for r in reports]
    lines.append("all residuals within budget" if ok else "some residual exceeds its budget")
    return lines, {"checks": reports, "passed": ok}


def cmd_khinchin(cfg: RunConfig, args):
    if cfg.kmax < 10:
        raise ValidationError("--kmax must be >= 10")
    r = measures.khinchin_constant(cfg.kmax)
    lines = [f"K = {r.K:.17g}", f"exp(K) = {r.exp_K:.17g}",
             f"tail bound = {r.tail_bound:.3e} (estimate {r.tail_estimate:.3e} included in K)"]
    return lines, r


def cmd_farey(cfg: RunConfig, args):
    if args.level is None:
        raise ValidationError("farey needs --level")
    try:
        fr = cf_dynamics.farey_level(args.level)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    text = cf_dynamics.format_fractions(fr)
    return [text], {"level": args.level, "fractions": fr}


def cmd_orbit(cfg: RunConfig, args):
    if args.word:
        try:
            digits = [int(k) for k in args.word.split(",")]
            orb = cf_dynamics.periodic_cf_value(digits)
        except ValueError as exc:
            raise ValidationError(f"--word: {exc}") from exc
        lines = [f"x = {orb.value:.17g}", f"weight = {orb.weight:.17g}",
                 f"farey period = {orb.farey_period}"]
        return lines, orb
    if args.orbit_len < 1000:
        raise ValidationError("--orbit-len must be >= 1000")
    b = measures.birkhoff_log_tau(cfg.seed, args.n_orbits, args.orbit_len)
    g = measures.sn_growth(cfg.seed, args.n_orbits, args.orbit_len)
    lines = [f"Birkhoff mean of log tau = {b.mean:.17g} +- {b.stderr:.3g}",
             "S_n/n medians: " + ", ".join(f"n={c}: {m:.6g}" for c, m in
                                          zip(g.extra["checkpoints"], g.extra["medians"]))]
    return lines, {"birkhoff_log_tau": b, "sn_growth": g}


COMMANDS = {
    "spectrum": cmd_spectrum,
    "zeta": cmd_zeta,
    "trace": cmd_trace,
    "verify": cmd_verify,
    "khinchin": cmd_khinchin,
    "farey": cmd_farey,
    "orbit": cmd_orbit,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--z", help="map parameter z (complex allowed, e.g. 0.3+0.2j)")
    common.add_argument("--s", help="determinant variable s")
    common.add_argument("--q", type=int)
    common.add_argument("--N", type=int, help="quadrature order")
    common.add_argument("--kmax", type=int, help="largest continued-fraction digit summed")
    common.add_argument("--nmax", type=int, help="terms of the Q_z series")
    common.add_argument("--Lmax", type=int, help="largest trace power")
    common.add_argument("--lambda", dest="lam", help="spectral parameter")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="report path ('-' for stdout)")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--threads", type=int, help="numba worker threads")

    p = argparse.ArgumentParser(prog="fareygauss", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("spectrum", parents=[common], help="eigenvalues of K_(z,q), T or M")
    sp.add_argument("--operator", choices=("kzq", "T", "M"), default="kzq")
    zp = sub.add_parser("zeta", parents=[common], help="Fredholm determinants and zeta_2")
    zp.add_argument("--farey-order", type=int, default=0, help="also print zeta_F to this order")
    sub.add_parser("trace", parents=[common], help="table of tr K_(z,q)^ell")
    sub.add_parser("verify", parents=[common], help="operator identity residual suite")
    sub.add_parser("khinchin", parents=[common], help="Khinchin's constant")
    fp = sub.add_parser("farey", parents=[common], help="Farey fractions of a level")
    fp.add_argument("--level", type=int)
    op = sub.add_parser("orbit", parents=[common], help="periodic orbit or Birkhoff sampling")
    op.add_argument("--word", help="comma-separated period, e.g. 1,2")
    op.add_argument("--n-orbits", type=int, default=100)
    op.add_argument("--orbit-len", type=int, default=10_000)
    return p


def _render(report, cfg: RunConfig) -> str:
    if cfg.format == "csv":
        if not hasattr(report, "to_csv"):
            raise ValidationError(f"--format csv is only available for 'trace'")
        return report.to_csv()
    return records.dumps({"config": cfg.to_dict(), "backend": _backend.backend_name(),
                          "result": report})


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        _backend.set_threads(cfg.threads)
        lines, report = COMMANDS[cfg.command](cfg, args)
        text = _render(report, cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        print("\n".join(lines))
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
    if cfg.command == "verify" and not report["passed"]:
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
