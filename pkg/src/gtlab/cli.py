"""Experiment harness.

Subcommands:

    simulate-2v    two-velocity run: trajectory CSV + fitted-vs-theory summary
    simulate-3v    three-velocity run, same outputs
    rates          theoretical rate bundles for a given sigma
    modal-report   per-mode eigenvalues and Lyapunov gaps (constant sigma)
    poincare       weighted Poincare constant, optionally the improvement iteration
    telegrapher    damped-wave spectral gap and the optimal-rate bundle
    appendix-a     three-rate comparison for the piecewise {1, 4} profile
    rate-curve     sharp rate mu(sigma) over a sigma grid

Common flags: --sigma (const:V | pc:V@B,... | file:PATH), --n, --dt,
--t-final, --theta, --alpha, --eps, --seed, --out, --config, --plot.
A config file holds flat KEY = VALUE lines overridden by CLI flags.
Exit codes: 0 success, 2 validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import poincare as poincare_mod
from . import telegrapher as tele_mod
from .errors import NumericalError, ValidationError
from .modal import modal_report, spectral_gap
from .profiles import RelaxationProfile
from .rates import (
    alpha_star,
    check_conditions_2v,
    check_conditions_3v,
    constant_rate,
    perturbative_rate,
    rate_3v,
    theta_star,
)
from .solver import (
    MacroState2V,
    default_window,
    fit_decay_rate,
    fit_envelope_rate,
    simulate_2v,
    simulate_3v,
    to_macro3,
)
from .torus import GridFunction, nodes, random_band_limited


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _print_table(header, rows) -> None:
    cells = [header] + [[_fmt(v) if not isinstance(v, str) else v for v in r] for r in rows]
    cells = [[c if len(c) <= 22 else c[:22] for c in r] for r in cells]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for r in cells:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)))


# ---------------------------------------------------------------------------
# initial data


def parse_field(spec: str, n: int, rng: np.random.Generator, zero_mean: bool = False) -> GridFunction:
    """'zero', 'one', 'const:C', 'sin[:k]', 'cos[:k]', 'random', 'file:PATH'."""
    x = nodes(n)
    tag, _, body = spec.partition(":")
    try:
        if tag == "zero":
            return GridFunction.zeros(n)
        if tag == "one":
            return GridFunction.constant(1.0, n)
        if tag == "const":
            return GridFunction.constant(float(body), n)
        if tag in ("sin", "cos"):
            k = int(body) if body else 1
            fn = np.sin if tag == "sin" else np.cos
            return GridFunction(fn(k * x))
        if tag == "random":
            seed = int(rng.integers(0, 2**31 - 1))
            return random_band_limited(n, seed=seed, zero_mean=zero_mean)
        if tag == "file":
            return GridFunction.from_csv(body)
    except (ValueError, OSError) as exc:
        raise ValidationError(f"cannot parse field spec {spec!r}: {exc}") from exc
    raise ValidationError(f"unknown field spec {spec!r}")


# ---------------------------------------------------------------------------
# plotting (optional; the numeric pipeline never requires matplotlib)


def _plot_or_skip(fn, path) -> None:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print(f"plot skipped (matplotlib unavailable): {path}", file=sys.stderr)
        return
    fig = plt.figure(figsize=(6.0, 4.0))
    fn(plt, fig)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _plot_decay(traj, theory_rate, path, label) -> None:
    def draw(plt, fig):
        t = traj.times
        e = np.maximum(traj["entropy"], 1e-300)
        plt.semilogy(t, e, label="entropy")
        plt.semilogy(t, e[0] * np.exp(-theory_rate * t), "--", label=f"rate {theory_rate:.4g}")
        plt.xlabel("t")
        plt.ylabel(label)
        plt.legend()

    _plot_or_skip(draw, path)


def _plot_eigenvalues(rows, sigma, path) -> None:
    def draw(plt, fig):
        re = [r["re_lam_minus"] for r in rows] + [r["re_lam_plus"] for r in rows]
        im = [r["im_lam_minus"] for r in rows] + [r["im_lam_plus"] for r in rows]
        plt.scatter(re, im, s=12)
        gap = spectral_gap(sigma).mu
        plt.axvline(gap, linestyle="--", color="tab:red", label=f"gap {gap:.5g}")
        plt.xlabel("Re lambda")
        plt.ylabel("Im lambda")
        plt.legend()

    _plot_or_skip(draw, path)


def _plot_rate_curve(sigmas, mus, path) -> None:
    def draw(plt, fig):
        plt.plot(sigmas, mus)
        plt.xlabel("sigma")
        plt.ylabel("mu(sigma)")

    _plot_or_skip(draw, path)


# ---------------------------------------------------------------------------
# subcommand handlers


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sigma_of(args) -> RelaxationProfile:
    return RelaxationProfile.parse(args.sigma)


def cmd_simulate_2v(args) -> int:
    out = _outdir(args)
    profile = _sigma_of(args)
    rng = np.random.default_rng(args.seed)
    u0 = parse_field(args.u0, args.n, rng, zero_mean=True)
    v0 = parse_field(args.v0, args.n, rng)
    traj = simulate_2v(
        MacroState2V(u0, v0),
        profile,
        args.t_final,
        dt=args.dt,
        scheme=args.scheme,
        theta=args.theta,
        record_every=args.record_every,
    )
    traj.to_csv(out / "trajectory.csv")

    window = default_window(traj.times)
    summary = []
    if profile.is_constant:
        s = profile.sigma_min
        rep = constant_rate(s, eps=args.eps if abs(s - 2.0) <= 1e-14 else None)
        e_rate, e_r2 = fit_decay_rate(traj.times, traj["entropy"], window)
        summary.append(("entropy", rep.theta, rep.rate, e_rate, e_rate - rep.rate, e_r2))
        n_rate, n_r2 = fit_decay_rate(traj.times, traj.pair_norm(), window)
        summary.append(("pair_norm", rep.theta, rep.mu, n_rate, n_rate - rep.mu, n_r2))
        if rep.defective:
            env_rate, env_r2 = fit_envelope_rate(traj.times, traj.pair_norm(), window)
            summary.append(("pair_norm_envelope", rep.theta, 1.0, env_rate, env_rate - 1.0, env_r2))
    else:
        rep = perturbative_rate(profile)
        e_rate, e_r2 = fit_decay_rate(traj.times, traj["entropy"], window)
        summary.append(("entropy", rep.theta, rep.rate, e_rate, e_rate - rep.rate, e_r2))
    write_csv(
        out / "summary.csv",
        ["series", "theta", "theoretical_rate", "fitted_rate", "margin", "r_squared"],
        summary,
    )
    if args.plot:
        _plot_decay(traj, summary[0][2], out / "entropy_decay.svg", "E_theta")
    _print_table(
        ["series", "theta", "theoretical", "fitted", "margin", "r2"],
        summary,
    )
    return 0


def cmd_simulate_3v(args) -> int:
    out = _outdir(args)
    profile = _sigma_of(args)
    rng = np.random.default_rng(args.seed)
    f1 = parse_field(args.f1, args.n, rng)
    f2 = parse_field(args.f2, args.n, rng)
    f3 = parse_field(args.f3, args.n, rng)
    init = to_macro3(f1, f2, f3)
    rep = rate_3v(profile.sigma_min, profile.sigma_max)
    theta = args.theta if args.theta is not None else rep.theta
    traj = simulate_3v(
        init,
        profile,
        args.t_final,
        dt=args.dt,
        scheme=args.scheme,
        theta=theta,
        record_every=args.record_every,
    )
    traj.to_csv(out / "trajectory.csv")
    window = default_window(traj.times)
    e_rate, e_r2 = fit_decay_rate(traj.times, traj["entropy"], window)
    write_csv(
        out / "summary.csv",
        ["series", "theta", "theoretical_rate", "fitted_rate", "margin", "r_squared"],
        [("entropy3", theta, rep.rate, e_rate, e_rate - rep.rate, e_r2)],
    )
    if args.plot:
        _plot_decay(traj, rep.rate, out / "entropy_decay.svg", "E3_theta")
    print(f"entropy3: theoretical {rep.rate:.6g}, fitted {e_rate:.6g} (r2={e_r2:.6f})")
    return 0


def cmd_rates(args) -> int:
    out = _outdir(args)
    profile = _sigma_of(args)
    rows = []
    if profile.is_constant:
        s = profile.sigma_min
        rep = constant_rate(s, eps=args.eps if abs(s - 2.0) <= 1e-14 else None)
        rows.append(rep.csv_row())
    else:
        rep = perturbative_rate(profile)
        rows.append(rep.csv_row())
        check = check_conditions_2v(rep.theta, rep.rate, profile)
        rows.append(("perturbative-conditions", rep.theta, rep.rate, 1.0 if check else 0.0))
    rep3 = rate_3v(profile.sigma_min, profile.sigma_max)
    rows.append(rep3.csv_row())
    check3 = check_conditions_3v(rep3.theta, rep3.rate, profile)
    rows.append(("three-velocity-conditions", rep3.theta, rep3.rate, 1.0 if check3 else 0.0))
    write_csv(out / "rates.csv", ["source", "theta", "rate", "prefactor"], rows)
    _print_table(["source", "theta", "rate", "prefactor"], rows)
    return 0


def cmd_modal_report(args) -> int:
    out = _outdir(args)
    profile = _sigma_of(args)
    if not profile.is_constant:
        raise ValidationError("modal-report needs a constant sigma")
    s = profile.sigma_min
    rows = modal_report(s, args.kmax, eps=args.eps if abs(s - 2.0) <= 1e-12 else None)
    write_csv(
        out / "modal_report.csv",
        ["k", "re_lam_minus", "im_lam_minus", "re_lam_plus", "im_lam_plus", "lyapunov_gap", "case"],
        [
            (
                r["k"],
                r["re_lam_minus"],
                r["im_lam_minus"],
                r["re_lam_plus"],
                r["im_lam_plus"],
                r["lyapunov_gap"],
                r["case"],
            )
            for r in rows
        ],
    )
    gap = spectral_gap(s)
    print(f"spectral gap mu({s:g}) = {gap.mu:.8g}" + (" (defective)" if gap.defective else ""))
    if args.plot:
        _plot_eigenvalues(rows, s, out / "eigenvalues.svg")
    return 0


def cmd_poincare(args) -> int:
    out = _outdir(args)
    if args.w1 is not None and args.w2 is not None:
        weight = poincare_mod.TwoPieceWeight(args.w1, args.w2)
    else:
        profile = _sigma_of(args)
        theta = args.theta if args.theta is not None else theta_star(profile.sigma_min, profile.sigma_max)
        alpha = args.alpha if args.alpha is not None else alpha_star(profile.sigma_min, profile.sigma_max)
        weight = poincare_mod.weight_from_sigma(profile, theta, alpha)
    result = poincare_mod.weighted_poincare(weight, scan_step=args.scan_step)
    write_csv(
        out / "poincare.csv",
        ["w1", "w2", "c_min", "c_omega_sq", "close_root_flag"],
        [(weight.w1, weight.w2, result.c_min, result.c_omega_sq, int(result.close_root_flag))],
    )
    print(
        f"weight ({weight.w1:.6g}, {weight.w2:.6g}): c_min = {result.c_min:.8g}, "
        f"C^2 = {result.c_omega_sq:.8g}, C = {result.c_omega:.8g}"
    )
    if args.improve:
        profile = _sigma_of(args)
        theta = args.theta if args.theta is not None else theta_star(profile.sigma_min, profile.sigma_max)
        alpha0 = args.alpha0 if args.alpha0 is not None else alpha_star(profile.sigma_min, profile.sigma_max)
        imp = poincare_mod.improved_alpha(profile, theta, alpha0)
        write_csv(
            out / "iterates.csv",
            ["n", "alpha"],
            [(i, a) for i, a in enumerate(imp.iterates)],
        )
        print(
            f"improved rate: alpha_max = {imp.alpha_max:.6g} after {imp.iterations} updates"
            + ("" if imp.converged else " (not converged)")
        )
    return 0


def cmd_telegrapher(args) -> int:
    out = _outdir(args)
    profile = _sigma_of(args)
    problem = tele_mod.rescale_sigma(profile)
    result = tele_mod.telegrapher_gap(problem)
    rows = sorted(
        ((r.real, r.imag, abs(tele_mod.det_M_gamma(r, problem))) for r in result.roots),
        key=lambda row: (row[0], row[1]),
    )
    write_csv(out / "telegrapher_roots.csv", ["re_gamma", "im_gamma", "abs_det"], rows)
    rate = min(problem.l1_norm, result.gap) / math.pi
    write_csv(
        out / "telegrapher_summary.csv",
        ["sigma1", "sigma2", "l1_norm", "gap", "alpha_bs", "eig_re", "eig_im", "minimiser_real"],
        [
            (
                problem.sigma1,
                problem.sigma2,
                problem.l1_norm,
                result.gap,
                rate,
                result.eigenvalue.real,
                result.eigenvalue.imag,
                int(result.minimiser_is_real),
            )
        ],
    )
    print(
        f"gap = {result.gap:.6g} at gamma = {result.eigenvalue:.6g} "
        f"({'real' if result.minimiser_is_real else 'complex'}); alpha_BS = {rate:.6g}"
    )
    return 0


def cmd_appendix_a(args) -> int:
    out = _outdir(args)
    profile = _sigma_of(args)
    s_min, s_max = profile.sigma_min, profile.sigma_max
    theta = theta_star(s_min, s_max)
    a_star = alpha_star(s_min, s_max)
    imp = poincare_mod.improved_alpha(profile, theta, a_star)
    bs = tele_mod.bs_rate(profile)
    rows = [
        ("perturbative", a_star),
        ("improved-poincare", imp.alpha_max),
        ("bernard-salvarani", bs.rate),
    ]
    write_csv(out / "comparison.csv", ["method", "rate"], rows)
    ordered = rows[0][1] < rows[1][1] < rows[2][1]
    print(
        f"rates: perturbative {a_star:.6g} < improved {imp.alpha_max:.6g} "
        f"< optimal {bs.rate:.6g}: ordering {'holds' if ordered else 'VIOLATED'}"
    )
    return 0


def cmd_rate_curve(args) -> int:
    out = _outdir(args)
    try:
        lo, hi, count = args.grid.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError as exc:
        raise ValidationError(f"bad --grid spec {args.grid!r}; want LO:HI:COUNT") from exc
    if not (0 < lo < hi and count >= 2):
        raise ValidationError(f"need 0 < LO < HI and COUNT >= 2, got {args.grid!r}")
    sigmas = np.linspace(lo, hi, count)
    sigmas = sigmas[np.abs(sigmas - 2.0) > 1e-12]  # defective point marked, not sampled
    rows = []
    for s in sigmas:
        gap = spectral_gap(float(s))
        rows.append((s, gap.mu, int(gap.defective)))
    write_csv(out / "rate_curve.csv", ["sigma", "mu", "defective"], rows)
    if args.plot:
        _plot_rate_curve([r[0] for r in rows], [r[1] for r in rows], out / "rate_curve.svg")
    print(f"tabulated mu(sigma) at {len(rows)} points into {out / 'rate_curve.csv'}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser, sigma_default: str | None = "const:1") -> None:
    if sigma_default is not None:
        p.add_argument("--sigma", default=sigma_default, help="const:V | pc:V@B,... | file:PATH")
    p.add_argument("--n", type=int, default=256, help="grid resolution")
    p.add_argument("--dt", type=float, default=None, help="time step (default: dx)")
    p.add_argument("--t-final", type=float, default=30.0, help="final time")
    p.add_argument("--theta", type=float, default=None, help="entropy twist weight")
    p.add_argument("--alpha", type=float, default=None, help="decay-rate parameter")
    p.add_argument("--eps", type=float, default=None, help="epsilon for the defective sigma = 2")
    p.add_argument("--seed", type=int, default=0, help="seed for random initial data")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--config", default=None, help="flat KEY = VALUE config file")
    p.add_argument("--plot", action="store_true", help="emit SVG plots")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gtlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-2v", help="run the two-velocity system")
    _add_common(p)
    p.add_argument("--scheme", choices=["split", "rk4"], default="split")
    p.add_argument("--u0", default="zero", help="initial mass density preset")
    p.add_argument("--v0", default="cos", help="initial flux density preset")
    p.add_argument("--record-every", type=int, default=1)
    p.set_defaults(handler=cmd_simulate_2v)

    p = sub.add_parser("simulate-3v", help="run the three-velocity system")
    _add_common(p)
    p.add_argument("--scheme", choices=["split", "rk4"], default="split")
    p.add_argument("--f1", default="one")
    p.add_argument("--f2", default="cos")
    p.add_argument("--f3", default="sin")
    p.add_argument("--record-every", type=int, default=1)
    p.set_defaults(handler=cmd_simulate_3v)

    p = sub.add_parser("rates", help="theoretical rate bundles for a profile")
    _add_common(p)
    p.set_defaults(handler=cmd_rates)

    p = sub.add_parser("modal-report", help="per-mode eigenvalues and gaps")
    _add_common(p, sigma_default="const:5")
    p.add_argument("--kmax", type=int, default=50)
    p.set_defaults(handler=cmd_modal_report)

    p = sub.add_parser("poincare", help="weighted Poincare constant")
    _add_common(p, sigma_default="pc:1@pi,4@2pi")
    p.add_argument("--w1", type=float, default=None)
    p.add_argument("--w2", type=float, default=None)
    p.add_argument("--scan-step", type=float, default=1e-3)
    p.add_argument("--improve", action="store_true", help="run the fixed-point improvement")
    p.add_argument("--alpha0", type=float, default=None, help="starting rate for --improve")
    p.set_defaults(handler=cmd_poincare)

    p = sub.add_parser("telegrapher", help="damped-wave spectral gap")
    _add_common(p, sigma_default="pc:1@pi,4@2pi")
    p.set_defaults(handler=cmd_telegrapher)

    p = sub.add_parser("appendix-a", help="three-rate comparison for pc:1@pi,4@2pi")
    _add_common(p, sigma_default="pc:1@pi,4@2pi")
    p.set_defaults(handler=cmd_appendix_a)

    p = sub.add_parser("rate-curve", help="mu(sigma) over a grid")
    _add_common(p, sigma_default=None)
    p.add_argument("--grid", default="0.05:10:200", help="LO:HI:COUNT")
    p.set_defaults(handler=cmd_rate_curve)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> list:
    """Fold a flat KEY = VALUE config file into argv as leading defaults."""
    if "--config" not in argv:
        return list(argv)
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise ValidationError("--config needs a file path")
    path = argv[idx + 1]
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path!r}: {exc}") from exc
    injected = []
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line is not KEY = VALUE: {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("_", "-")
        value = value.strip()
        if value.lower() in ("true", "yes", "on"):
            injected.append(f"--{key}")
        else:
            injected.extend([f"--{key}", value])
    # config-provided values go first so explicit flags win
    return [argv[0]] + injected + argv[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
