"""Command-line front end.

Complex numbers are written ``re,im`` on the command line and ``[re, im]`` in
JSON.  Data goes to stdout (or ``--out``); diagnostics go to stderr.  Exit
codes: 0 success, 1 failed verification, 2 bad configuration, 3 numerical
error (the error class name is printed).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import chirality, continuation, epsearch, model, puiseux
from .cmatrix import char_poly, completeness_defect, eigensystem, t_product
from .errors import EPError


class ConfigError(Exception):
    pass


def fmt(x: float) -> str:
    return "%.12g" % x


def _round(obj):
    """Recursively turn numbers into 12-significant-digit floats and complex into ``[re, im]``."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(fmt(x)) + 0.0 if math.isfinite(x) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [_round(obj.real), _round(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [_round(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


_FLAT_LIST = re.compile(r"\[\s+([^\[\]{}]*?)\s+\]")


def dump_json(obj) -> str:
    text = json.dumps(_round(obj), indent=2)
    # keep innermost number lists on one line
    text = _FLAT_LIST.sub(lambda m: "[" + ", ".join(x.strip() for x in m.group(1).split(",")) + "]", text)
    return text + "\n"


def parse_complex(s) -> complex:
    try:
        if isinstance(s, (list, tuple)):
            if len(s) != 2:
                raise ValueError
            return complex(float(s[0]), float(s[1]))
        if isinstance(s, (int, float)):
            return complex(s)
        parts = str(s).split(",")
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) != 2:
            raise ValueError
        return complex(float(parts[0]), float(parts[1]))
    except (TypeError, ValueError):
        raise ConfigError(f"cannot read complex number from {s!r} (expected re,im or [re, im])") from None


def parse_sign(s) -> int:
    if s in ("+", "+1", 1, "1"):
        return 1
    if s in ("-", "-1", -1):
        return -1
    raise ConfigError(f"sign must be + or -, got {s!r}")


@dataclass
class Setup:
    family: model.Family
    center: complex = 0j
    direction: complex = 1 + 0j
    radii: np.ndarray = field(default_factory=lambda: puiseux.DEFAULT_RADII.copy())
    psi_ep: np.ndarray | None = None
    E_c: complex | None = None
    special: model.SpecialFamilyParams | None = None
    tolerances: dict = field(default_factory=dict)


def _special_setup(e, signs, tunable=False) -> Setup:
    p = model.ep3_couplings(*e, *signs)
    f = model.build_special(p, tunable=tunable)
    return Setup(f, psi_ep=model.ep_vector(*p.e, p.sign_s2, p.sign_s3), E_c=p.E_c, special=p)


def _matrix(rows) -> np.ndarray:
    try:
        return np.array([[parse_complex(x) for x in row] for row in rows], dtype=complex)
    except TypeError:
        raise ConfigError("matrix must be a nested list of [re, im] pairs") from None


def setup_from_config(cfg: dict) -> Setup:
    if not isinstance(cfg, dict) or "model" not in cfg:
        raise ConfigError("config needs a 'model' entry")
    m = cfg["model"]
    if not isinstance(m, dict) or len(m) != 1:
        raise ConfigError("'model' must have exactly one of: special, generic, explicit")
    kind, body = next(iter(m.items()))
    if kind == "special":
        e = [parse_complex(x) for x in body.get("e", [])]
        if len(e) != 3:
            raise ConfigError("special model needs three energies 'e'")
        signs = [parse_sign(x) for x in body.get("signs", [1, 1])]
        st = _special_setup(e, signs, tunable=bool(body.get("tunable", False)))
    elif kind == "generic":
        try:
            gp = model.GenericFamilyParams(tuple(parse_complex(x) for x in body["e"]),
                                           tuple(parse_complex(x) for x in body["o"]),
                                           tuple(float(a) for a in body["angles"]))
        except KeyError as k:
            raise ConfigError(f"generic model is missing {k}") from None
        if len(gp.e) != 3 or len(gp.o) != 3 or len(gp.angles) != 3:
            raise ConfigError("generic model needs three e, o and angles")
        st = Setup(model.build_generic(gp, tuple(body.get("tune", ()))))
    elif kind == "explicit":
        try:
            st = Setup(model.Family(_matrix(body["H0"]), _matrix(body["H1"]), {"kind": "explicit"}))
        except KeyError as k:
            raise ConfigError(f"explicit model is missing {k}") from None
    else:
        raise ConfigError(f"unknown model kind {kind!r}")
    sw = cfg.get("sweep", {})
    if "center" in sw:
        st.center = parse_complex(sw["center"])
    if "direction" in sw:
        st.direction = parse_complex(sw["direction"])
    if "radii" in sw:
        st.radii = np.array([float(r) for r in sw["radii"]])
    elif "grid" in sw:
        g = sw["grid"]
        st.radii = np.geomspace(float(g["r_max"]), float(g["r_min"]), int(g["n"]))
    if "psi_ep" in cfg:
        st.psi_ep = np.array([parse_complex(x) for x in cfg["psi_ep"]])
    if "E_c" in cfg:
        st.E_c = parse_complex(cfg["E_c"])
    st.tolerances = dict(cfg.get("tolerances", {}))
    return st


def build_setup(args) -> Setup:
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        st = setup_from_config(cfg)
    elif getattr(args, "model", None) == "ep2":
        st = Setup(model.ep2_control(), center=0.5j, E_c=0.5 + 0j)
    else:
        e = [parse_complex(x) for x in args.e] if args.e else [0j, 1 + 0j, 3 + 0j]
        if len(e) != 3:
            raise ConfigError("--e needs three values")
        signs = [parse_sign(s) for s in args.signs]
        st = _special_setup(e, signs, tunable=getattr(args, "tunable", False))
    if getattr(args, "center", None) is not None:
        st.center = parse_complex(args.center)
    if getattr(args, "direction", None) is not None:
        st.direction = parse_complex(args.direction)
    if getattr(args, "radii", None):
        st.radii = np.array([float(r) for r in args.radii])
    return st


def resolve_psi(st: Setup) -> np.ndarray:
    if st.psi_ep is None:
        M = st.family.at(st.center)
        E_c = st.E_c if st.E_c is not None else complex(np.trace(M)) / st.family.dim
        st.psi_ep = model.coalesced_vector(M, E_c)
    return st.psi_ep


# ---- subcommands ----------------------------------------------------------

def cmd_construct(args, out):
    st = build_setup(args)
    if st.special is None:
        raise ConfigError("construct needs a special model")
    p = st.special
    f = st.family
    rank_ok = model.validate_ep3(f.H0, p.E_c)
    res = max(abs(x - y) for x, y in zip(char_poly(f.H0), (-3 * p.E_c, 3 * p.E_c**2, -(p.E_c**3))))
    out.write(dump_json({
        "e": list(p.e),
        "signs": [p.sign_s2, p.sign_s3],
        "s2": p.s2,
        "s3": p.s3,
        "E_c": p.E_c,
        "psi_ep": st.psi_ep,
        "psi_ep_self_product": t_product(st.psi_ep, st.psi_ep),
        "a1_abs": abs(model.first_order_energy_coeff(*p.e)),
        "a1_cubed": model.energy_coeff_cubed(f, p.E_c),
        "char_poly_residual": res,
        "degenerate": p.degenerate,
        "validated": rank_ok,
    }))
    return 0


SWEEP_HEADER = ["lambda_re", "lambda_im", "sheet", "E_re", "E_im", "t_norm_abs", "overlap_abs"]


def sweep_rows(st: Setup) -> list[list]:
    psi = resolve_psi(st)
    k = puiseux.gauge_index(psi)
    psi = puiseux.gauge_fix(psi, k)
    s = puiseux.radial_samples(st.family, st.center, st.direction, st.radii)
    rows = []
    for i, lam in enumerate(s.lambdas):
        for j in range(s.nsheets):
            v = puiseux.gauge_fix(s.vectors[i, j], k)
            E = s.energies[i, j]
            rows.append([lam.real, lam.imag, j + 1, E.real, E.imag,
                         abs(t_product(v, v)), abs(t_product(v, psi))])
    return rows


def write_csv(header, rows, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([str(x) if isinstance(x, int) else fmt(x) for x in row])


def cmd_sweep(args, out):
    st = build_setup(args)
    write_csv(SWEEP_HEADER, sweep_rows(st), out)
    return 0


def parse_sweep_csv(fh) -> list[list]:
    try:
        r = csv.reader(fh)
        header = next(r)
        if header != SWEEP_HEADER:
            raise ConfigError(f"unexpected CSV header {header}")
        return [[float(x[0]), float(x[1]), int(x[2]), *map(float, x[3:])] for x in r]
    except (ValueError, IndexError, StopIteration) as exc:
        raise ConfigError(f"cannot read sweep CSV: {exc}") from None


def read_sweep_csv(path) -> list[list]:
    try:
        with open(path, newline="") as fh:
            return parse_sweep_csv(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read sweep CSV: {exc}") from None


def fit_rows(rows, center: complex) -> dict:
    """Power fits of a sweep table; ``E_c`` is the centroid at the smallest radius."""
    sheets = sorted({int(r[2]) for r in rows})
    lams = []
    for r in rows:
        lam = complex(r[0], r[1])
        if not lams or lams[-1] != lam:
            lams.append(lam)
    radii = np.array([abs(l - center) for l in lams])
    by = {(complex(r[0], r[1]), int(r[2])): r for r in rows}
    E = np.array([[complex(by[(l, s)][3], by[(l, s)][4]) for s in sheets] for l in lams])
    tn = np.array([[by[(l, s)][5] for s in sheets] for l in lams])
    ov = np.array([[by[(l, s)][6] for s in sheets] for l in lams])
    E_c = complex(E[-1].mean())
    fit = lambda y: puiseux.fit_power(radii, y).__dict__  # noqa: E731
    out = {"E_c": E_c, "energy": {}, "t_norm": {}, "overlap": {}}
    for k, s in enumerate(sheets):
        out["energy"][str(s)] = fit(np.abs(E[:, k] - E_c))
        out["t_norm"][str(s)] = fit(tn[:, k])
        out["overlap"][str(s)] = fit(ov[:, k])
    pn, pre_n = puiseux.pooled_fit(radii, tn.T)
    po, pre_o = puiseux.pooled_fit(radii, ov.T)
    out["t_norm_pooled"] = {**pn.__dict__, "sheet_prefactors": pre_n}
    out["overlap_pooled"] = {**po.__dict__, "sheet_prefactors": pre_o}
    for d in (out["energy"], out["t_norm"], out["overlap"]):
        for v in d.values():
            v.pop("residuals")
    out["t_norm_pooled"].pop("residuals")
    out["overlap_pooled"].pop("residuals")
    return out


def cmd_fit(args, out):
    if args.csv:
        rows = read_sweep_csv(args.csv)
        center = parse_complex(args.center) if args.center is not None else 0j
    else:
        st = build_setup(args)
        # go through the CSV text so both routes fit identical numbers
        buf = io.StringIO()
        write_csv(SWEEP_HEADER, sweep_rows(st), buf)
        buf.seek(0)
        rows = parse_sweep_csv(buf)
        center = st.center
    out.write(dump_json(fit_rows(rows, center)))
    return 0


def cmd_monodromy(args, out):
    st = build_setup(args)
    res = continuation.monodromy(st.family, st.center, args.radius, loops=args.loops,
                                 steps_per_loop=args.steps, clockwise=args.clockwise)
    out.write(dump_json({"permutation": list(res.permutation),
                         "vector_factors": list(res.vector_factors),
                         "loops": res.loops, "order": res.order}))
    return 0


def cmd_locate(args, out):
    st = build_setup(args)
    lam0 = parse_complex(args.lam) if args.lam is not None else st.center
    if args.order == 2:
        loc = epsearch.locate_ep2(st.family, lam0)
    else:
        p0 = [float(x) for x in args.p0] if args.p0 else None
        loc = epsearch.locate_ep3(st.family, lam0, p0, fix_lambda=args.fix_lambda)
    d = loc.to_dict()
    if st.family.tuning is not None:
        d["tuning_names"] = list(st.family.tuning.names)
    out.write(dump_json(d))
    return 0


def _classify(args):
    st = build_setup(args)
    if args.lam is None:
        raise ConfigError("--lambda is required")
    return st, chirality.classify(st.family, parse_complex(args.lam), st.center, resolve_psi(st))


def cmd_classify(args, out):
    _, rep = _classify(args)
    out.write(dump_json(rep.to_dict()))
    return 0


def cmd_helix(args, out):
    _, rep = _classify(args)
    heights = rep.ordered.energies.real
    rows = [["point", *p] for p in rep.helix]
    rows += [["curve", *p] for p in chirality.helix_curve(rep.assigned_phases, heights, 60)]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["kind", "x", "y", "z"])
    for row in rows:
        w.writerow([row[0], *(fmt(float(x)) for x in row[1:])])
    return 0


def verify_checks(name: str):
    """``(label, passed, detail)`` for the invariant suite of a built-in model."""
    if name != "e013":
        raise ConfigError(f"unknown built-in model {name!r} (available: e013)")
    checks = []

    def add(label, ok, detail):
        checks.append((label, bool(ok), detail))

    p = model.ep3_couplings(0, 1, 3, 1, -1)
    f = model.build_special(p)
    psi = model.ep_vector(0, 1, 3, 1, -1)
    add("E_c = 4/3", abs(p.E_c - 4 / 3) <= 1e-12, f"E_c = {fmt(p.E_c.real)}")
    add("single 3x3 Jordan block", model.validate_ep3(f.H0, p.E_c), "rank(H0 - E_c) = 2")
    add("psi_EP self-orthogonal", abs(t_product(psi, psi)) <= 1e-10, f"|psi^T psi| = {abs(t_product(psi, psi)):.2e}")
    es = eigensystem(f.at(1.0))
    d = completeness_defect(es)
    add("bi-orthogonal completeness at lam = 1", d <= 1e-9, f"defect = {d:.2e}")

    s = puiseux.radial_samples(f, 0, 1, puiseux.DEFAULT_RADII)
    en = puiseux.verify_energy_expansion(f, samples=s)
    ex = [fit.exponent for fit in en.fits]
    add("energy exponents 1/3", all(abs(x - 1 / 3) <= 0.005 for x in ex), "exponents " + ", ".join(f"{x:.5f}" for x in ex))
    a1 = abs(model.first_order_energy_coeff(0, 1, 3))
    pre = [fit.prefactor_magnitude for fit in en.fits]
    add("|a1| prefactor", all(abs(x / a1 - 1) <= 5e-3 for x in pre), f"|a1| = {a1:.7f}")
    add("equilateral triangle", np.all(en.side_spread <= 0.02) and np.all(en.angle_error_deg <= 1.0),
        f"max side spread {en.side_spread.max():.2e}, angle error {en.angle_error_deg.max():.3f} deg")
    ov = puiseux.verify_overlap_scaling(f, 0, 1, puiseux.DEFAULT_RADII, psi, samples=s)
    add("overlap exponents 2/3", abs(ov.norm_fit.exponent - 2 / 3) <= 0.01 and abs(ov.overlap_fit.exponent - 2 / 3) <= 0.01,
        f"norm {ov.norm_fit.exponent:.5f}, overlap {ov.overlap_fit.exponent:.5f}")

    m1 = continuation.monodromy(f, 0, 1e-2, loops=1)
    m3 = continuation.monodromy(f, 0, 1e-2, loops=3)
    add("monodromy order 3", m1.order == 3 and m3.permutation == (1, 2, 3)
        and max(abs(z - 1) for z in m3.vector_factors) <= 1e-6, f"one loop {m1.permutation}")

    ph = chirality.phase_coefficients(f, 1e-6, 0, psi)
    add("phase coefficients", ph.magnitude_spread <= 5e-3 and ph.cube_misalignment_deg <= 1.5,
        f"|c| spread {ph.magnitude_spread:.2e}, cube misalignment {ph.cube_misalignment_deg:.3f} deg")
    g = model.special_family((0, 1, 3))
    rep = chirality.classify(g, 1e-3, 0, model.ep_vector(0, 1, 3))
    add("chirality at lam = 1e-3", rep.width.variant is chirality.Variant.MIDDLE_BROADEST
        and rep.handedness is chirality.Handedness.RIGHT, f"{rep.width.variant.value}, {rep.handedness.value}")
    phi = puiseux.extract_phi(f, 0, 1, 1e-6, 1, psi)
    orth = abs(t_product(psi, phi.projected)) / np.linalg.norm(phi.projected)
    add("psi_EP^T phi_1 = 0", orth <= 1e-6, f"relative residual {orth:.2e}")

    e2 = model.ep2_control()
    loc = epsearch.locate_ep2(e2, 0.4j)
    add("EP2 located at i/2", abs(loc.lambda_c - 0.5j) <= 1e-8, f"lambda_c = {loc.lambda_c:.12g}")
    rep2 = puiseux.appendix_report(e2, 0.5j, 2, E_c=0.5)
    add("EP2 overlap exponent 1/2", abs(rep2.overlap_exponent - 0.5) <= 0.01, f"{rep2.overlap_exponent:.5f}")
    t = model.build_special(p, tunable=True)
    loc3 = epsearch.locate_ep3(t, 0, t.tuning.values * 1.05, fix_lambda=True)
    err = float(np.max(np.abs(np.abs(loc3.tuning_at_solution) - np.abs(t.tuning.values))))
    add("EP3 couplings recovered (lam fixed)", err <= 1e-8, f"max error {err:.2e}")
    return checks


def cmd_verify(args, out):
    t0 = time.time()
    checks = verify_checks(args.model or "e013")
    width = max(len(c[0]) for c in checks)
    for label, ok, detail in checks:
        out.write(f"{'PASS' if ok else 'FAIL'}  {label:<{width}}  {detail}\n")
    n_ok = sum(ok for _, ok, _ in checks)
    out.write(f"{n_ok}/{len(checks)} passed in {time.time() - t0:.1f} s\n")
    return 0 if n_ok == len(checks) else 1


# ---- argument parsing -----------------------------------------------------

def _model_args(p, tunable=False):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--e", nargs=3, metavar="RE,IM", help="level energies of the special model")
    p.add_argument("--signs", nargs=2, default=["+", "+"], metavar="SIGN", help="coupling signs, + or -")
    p.add_argument("--model", choices=["e013", "ep2"], help="built-in model")
    p.add_argument("--center", metavar="RE,IM", help="expansion point in lambda")
    if tunable:
        p.add_argument("--tunable", action="store_true", help="expose the couplings as tuning parameters")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ep3chiral", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="closed-form EP3 couplings and reference data")
    _model_args(p)
    p.set_defaults(func=cmd_construct)

    for name, func, helptext in (("sweep", cmd_sweep, "radial sweep as CSV"),
                                 ("fit", cmd_fit, "power-law fits as JSON")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        _model_args(p)
        p.add_argument("--direction", metavar="RE,IM")
        p.add_argument("--radii", nargs="+", type=float)
        if name == "fit":
            p.add_argument("--csv", help="fit an existing sweep CSV instead of re-running")
        p.set_defaults(func=func)

    p = sub.add_parser("monodromy", parents=[common], help="sheet permutation after loops around the EP")
    _model_args(p)
    p.add_argument("--radius", type=float, default=1e-2)
    p.add_argument("--loops", type=int, default=1)
    p.add_argument("--steps", type=int, default=360, help="steps per loop")
    p.add_argument("--clockwise", action="store_true")
    p.set_defaults(func=cmd_monodromy)

    p = sub.add_parser("locate", parents=[common], help="Newton / Gauss-Newton EP search")
    _model_args(p, tunable=True)
    p.add_argument("--order", type=int, choices=[2, 3], default=3)
    p.add_argument("--lambda", dest="lam", metavar="RE,IM", help="initial guess for lambda")
    p.add_argument("--p0", nargs="+", help="initial tuning parameters")
    p.add_argument("--fix-lambda", action="store_true", help="hold lambda at the guess")
    p.set_defaults(func=cmd_locate)

    for name, func, helptext in (("classify", cmd_classify, "chirality report as JSON"),
                                 ("helix", cmd_helix, "helix points and curve as CSV")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        _model_args(p)
        p.add_argument("--lambda", dest="lam", metavar="RE,IM", required=False)
        p.set_defaults(func=func)

    p = sub.add_parser("verify", parents=[common], help="invariant suite on a built-in model")
    p.add_argument("--model", default="e013")
    p.set_defaults(func=cmd_verify)
    return ap


def run(argv=None, stdout=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except EPError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        (stdout or sys.stdout).write(text)
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))
