"""Command-line front end.

Every subcommand prints a single JSON document

    {"status": ..., "payload": ..., "residuals": ..., "seed": ...}

and exits with 0 (ok), 1 (malformed input), 2 (hypothesis_failed),
3 (not_found) or 4 (budget_exceeded).  Matrices are read from JSON files
either as nested lists or as {"rows", "cols", "entries"} with integer
strings; complex points use {"re": [...], "im": [...]}.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import SpRealError
from .linalg import int_matrix, matrix_from_json

EXIT = {"ok": 0, "malformed": 1, "hypothesis_failed": 2, "not_found": 3, "budget_exceeded": 4}


class Malformed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise Malformed(message)


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise Malformed(f"cannot read {path}: {exc}") from exc


def _int_matrix(obj):
    if isinstance(obj, dict) and "entries" in obj:
        return matrix_from_json(obj)
    M = int_matrix(obj)
    if M.ndim != 2:
        raise ValueError("expected a matrix")
    return M


def _real_matrix(obj):
    if isinstance(obj, dict) and "entries" in obj:
        return np.asarray(matrix_from_json(obj), dtype=float)
    M = np.asarray(obj, dtype=float)
    if M.ndim != 2:
        raise ValueError("expected a matrix")
    return M


def _exact_or_real(obj):
    try:
        return _int_matrix(obj)
    except (ValueError, TypeError):
        return _real_matrix(obj)


def _complex_matrix(obj):
    if isinstance(obj, dict) and "re" in obj:
        return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj.get("im", 0.0), dtype=float)
    return np.asarray(obj, dtype=complex)


def _out(M):
    M = np.asarray(M)
    if M.dtype == object:
        return [[int(x) for x in row] for row in M]
    if np.iscomplexobj(M):
        return {"re": M.real.tolist(), "im": M.imag.tolist()}
    return M.tolist()


def _need(args, name):
    value = getattr(args, name, None)
    if value is None:
        raise Malformed(f"--{name.replace('_', '-')} is required")
    return value


# subcommands return (payload, residuals)

def cmd_snf(args):
    from .linalg import smith_normal_form

    M = _int_matrix(_load(_need(args, "input")))
    s = smith_normal_form(M)
    ok = np.array_equal(s.U @ M @ s.V, s.D)
    if not ok:
        raise AssertionError("U M V != D")
    return ({"U": _out(s.U), "D": _out(s.D), "V": _out(s.V),
             "diagonal": [int(d) for d in s.diagonal]}, {"UMV_minus_D": 0})


def cmd_sp_check(args):
    from .symplectic import is_symplectic

    g = _exact_or_real(_load(_need(args, "input")))
    return {"symplectic": bool(is_symplectic(g, args.tol))}, {}


def cmd_tau(args):
    from .symplectic import check_symplectic, tau

    g = check_symplectic(_exact_or_real(_load(_need(args, "input"))), args.tol)
    t = tau(g)
    return {"tau": _out(t)}, {"involution": float(np.max(np.abs(np.asarray(tau(t) - g, dtype=float))))}


def cmd_twist(args):
    from .congruence import twist
    from .symplectic import check_symplectic, sp_inverse, tau

    g = check_symplectic(_int_matrix(_load(_need(args, "input"))))
    t = twist(g)
    if not np.array_equal(t, tau(g) @ sp_inverse(g)):
        raise AssertionError("closed form disagrees with tau(g) g^-1")
    return {"twist": _out(t)}, {"closed_form_vs_generic": 0}


def cmd_factor(args):
    from .congruence import factor_beta_u
    from .symplectic import check_symplectic

    g = check_symplectic(_int_matrix(_load(_need(args, "input"))))
    beta, u = factor_beta_u(g, args.m or 1)
    if not np.array_equal(beta @ u, g):
        raise AssertionError("beta u != g")
    return {"beta": _out(beta), "u": _out(u)}, {"beta_u_minus_g": 0}


def cmd_cocycle_check(args):
    from .galois import cocycle_conditions, is_cocycle

    gamma = _exact_or_real(_load(_need(args, "input")))
    return ({"is_cocycle": bool(is_cocycle(gamma, args.tol)),
             "conditions": cocycle_conditions(gamma, args.tol)}, {})


def cmd_trivialize(args):
    from .galois import HYPOTHESIS_TOL, trivialize

    gamma = _real_matrix(_load(_need(args, "input")))
    t = trivialize(gamma, args.tol or HYPOTHESIS_TOL)
    return ({"witness": _out(t.witness), "rank": t.rank, "fixed_point": _out(t.fixed_point)},
            {"coboundary": t.residual})


def cmd_real_locus(args):
    from .galois import HYPOTHESIS_TOL, coboundary_residual, real_locus

    gamma = _real_matrix(_load(_need(args, "input")))
    loc = real_locus(gamma, seed=args.seed, tol=args.tol or HYPOTHESIS_TOL)
    return ({"witness": _out(loc.witness), "samples": [_out(Z) for Z in loc.samples]},
            {"locus": loc.max_residual, "coboundary": coboundary_residual(gamma, loc.witness)})


def cmd_normalize_involution(args):
    from .involution import normalize_involution, normalize_involution_block

    A = _int_matrix(_load(_need(args, "input")))
    k = _need(args, "k")
    if args.q is None:
        p, signs = normalize_involution(A, k)
    else:
        p, signs = normalize_involution_block(A, k, args.q)
    return {"p": _out(p), "signs": [int(s) for s in signs]}, {"congruence_mod_2k": 0}


def cmd_boundary(args):
    from .boundary import BoundaryPair, normalize_pair, two_power_normal_form

    data = _load(_need(args, "input"))
    try:
        bp = BoundaryPair(int(data["q"]), _int_matrix(data["a"]), _int_matrix(data["gamma"]),
                          int(data.get("m", args.m or 1)))
    except KeyError as exc:
        raise Malformed(f"missing field {exc}") from exc
    bound = 6 if args.bound is None else args.bound
    res = normalize_pair(bp, bound)
    payload = {"g": _out(res.g), "gamma_prime": _out(res.gamma_prime), "u": _out(res.u),
               "u2": _out(res.u2), "h": _out(res.h), "word": res.word,
               "checks": res.checks}
    if args.k is not None:
        tp = two_power_normal_form(bp, args.k, bound)
        payload["two_power"] = {"g": _out(tp.g), "r": tp.r, "u": _out(tp.u), "signs": tp.signs}
    return payload, {}


def _gamma_and_Z(args):
    gamma = _int_matrix(_load(_need(args, "gamma")))
    Z = _complex_matrix(_load(_need(args, "Z")))
    return gamma, Z


def cmd_kappa(args):
    from .moduli import RealStructure, kappa_checks, kappa_lattice_matrix

    gamma, Z = _gamma_and_Z(args)
    rs = RealStructure(gamma, Z)
    rng = np.random.default_rng(args.seed)
    checks = kappa_checks(rs, rng)
    K = kappa_lattice_matrix(rs)
    return {"multiplier": _out(rs.multiplier), "lattice_matrix": np.round(K).astype(int).tolist()}, checks


def cmd_level_check(args):
    from .moduli import gamma_level_equivalence_check

    gamma, Z = _gamma_and_Z(args)
    N = _need(args, "N")
    lhs, rhs = gamma_level_equivalence_check(gamma, Z, N)
    return {"in_gamma_N": lhs, "level_compatible": rhs, "agree": lhs == rhs, "N": N}, {}


def cmd_h1_count(args):
    from .enumeration import h1_double_cosets

    table = h1_double_cosets(_need(args, "n"), _need(args, "m"), cache_dir=args.cache)
    return {"cardinality": table.cardinality, "representatives": table.representatives,
            "subset_size": table.subset_size, "linear_image_size": table.linear_image_size}, {}


def cmd_sl2_components(args):
    from .enumeration import sl2_real_components

    return {"count": sl2_real_components()}, {}


def cmd_verify_suite(args):
    from .suite import verify_suite

    report = verify_suite(args.scale, seed=args.seed, only=args.only, canary=args.canary)
    return report, {}


COMMANDS = {
    "snf": (cmd_snf, "Smith normal form with transforms"),
    "sp-check": (cmd_sp_check, "test tg J g = J"),
    "tau": (cmd_tau, "the involution g -> I_- g I_-"),
    "twist": (cmd_twist, "tau(g) g^-1 by the closed form"),
    "factor": (cmd_factor, "g = beta u with beta in Gamma_2m(2)"),
    "cocycle-check": (cmd_cocycle_check, "gamma tau(gamma) = I and block conditions"),
    "trivialize": (cmd_trivialize, "real g with gamma = tau(g) g^-1"),
    "real-locus": (cmd_real_locus, "witness and sample points of the real locus"),
    "normalize-involution": (cmd_normalize_involution, "p^-1 A p == diag(+-1) mod 2^k"),
    "boundary": (cmd_boundary, "normalize a boundary pair"),
    "kappa": (cmd_kappa, "real structure attached to (gamma, Z)"),
    "level-check": (cmd_level_check, "gamma in Gamma(N) versus level compatibility"),
    "h1-count": (cmd_h1_count, "double coset table modulo 4m"),
    "sl2-components": (cmd_sl2_components, "components for the modular curve of level 2"),
    "verify-suite": (cmd_verify_suite, "run the property batteries"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spreal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float)
        p.add_argument("--bound", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--N", type=int)
        if name == "normalize-involution":
            p.add_argument("--q", type=int)
        if name in ("kappa", "level-check"):
            p.add_argument("--gamma")
            p.add_argument("--Z")
        if name == "h1-count":
            p.add_argument("--cache")
        if name == "verify-suite":
            p.add_argument("scale", nargs="?", default="smoke", choices=["smoke", "full"])
            p.add_argument("--only", nargs="*")
            p.add_argument("--canary", action="store_true",
                           help="run with a deliberately broken tau; the twist property must fail")
    return parser


def run(argv=None) -> tuple[int, dict]:
    """Parse, execute and return (exit code, JSON document)."""
    seed = None
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise Malformed("no subcommand given")
        seed = args.seed
        func = COMMANDS[args.command][0]
        payload, residuals = func(args)
        status = "ok"
        if args.command == "verify-suite" and not payload["passed"]:
            status = "hypothesis_failed"
        doc = {"status": status, "payload": payload, "residuals": residuals, "seed": seed}
    except Malformed as exc:
        return EXIT["malformed"], {"status": "malformed", "payload": {"error": str(exc)},
                                   "residuals": {}, "seed": seed}
    except SpRealError as exc:
        doc = {"status": exc.status, "payload": {"error": f"{type(exc).__name__}: {exc}"},
               "residuals": {}, "seed": seed}
    except (ValueError, TypeError, KeyError) as exc:
        return EXIT["malformed"], {"status": "malformed",
                                   "payload": {"error": f"{type(exc).__name__}: {exc}"},
                                   "residuals": {}, "seed": seed}
    return EXIT[doc["status"]], doc


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return _out(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def main(argv=None) -> int:
    code, doc = run(argv)
    print(json.dumps(doc, sort_keys=True, default=_jsonable))
    return code


if __name__ == "__main__":
    sys.exit(main())
