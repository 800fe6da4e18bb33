"""Command-line front end: ``ent-tcu {encode,verify,sim,cost,soc,sweep}``.

Reports are CSV. ``--out`` writes to a file (relative paths resolve under
``$ENT_TCU_OUT_DIR`` when set); otherwise CSV goes to stdout.

Exit codes: 0 ok, 2 invalid input, 3 verification mismatch, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import random
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .cost import CostTable, TableError, default_cost_table, up_ratio_sweep
from .encoding import (
    EncodingError,
    Scheme,
    encoded_width,
    ent_decode,
    ent_encode_signed,
    ent_encode_unsigned,
    mbe_recode,
)
from .multiplier import ent_multiply, mbe_multiply
from .simulator import (
    KINDS,
    MODES,
    ArchConfig,
    ConfigError,
    Kind,
    Mode,
    ShapeError,
    build,
    cycle_count,
    scale_config,
)
from .soc import CATEGORIES, LayerError, SocConfig, estimate_inference_energy, load_network

EXIT_OK, EXIT_INVALID, EXIT_MISMATCH, EXIT_IO = 0, 2, 3, 4
OUT_DIR_ENV = "ENT_TCU_OUT_DIR"


class InvalidInput(Exception):
    pass


def _choices(text: str, enum, everything) -> list:
    if text == "all":
        return list(everything)
    try:
        return [enum(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None


def _ints(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InvalidInput(f"expected comma-separated integers, got {text!r}") from None


def _emit(rows: List[dict], out: Optional[str]) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else [], lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if out is None:
        sys.stdout.write(buf.getvalue())
        return
    path = Path(out)
    if not path.is_absolute() and os.environ.get(OUT_DIR_ENV):
        path = Path(os.environ[OUT_DIR_ENV]) / path
    path.write_text(buf.getvalue())


def _table(args) -> CostTable:
    if args.cost_table:
        return CostTable.load(args.cost_table)
    return default_cost_table()


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def cmd_encode(args) -> int:
    n = args.width
    if args.scheme == "mbe":
        d = mbe_recode(args.value, n)
        digits = ",".join(str(m) for m in reversed(d.digits))
        print(f"digits (MSB->LSB): {{{digits}}}")
        print("controls NEG,SE,CE (MSB->LSB): " + " ".join("".join(map(str, c)) for c in reversed(d.controls)))
    else:
        enc = ent_encode_unsigned(args.value, n) if args.unsigned else ent_encode_signed(args.value, n)
        lead = "carry_out" if args.unsigned else "sign"
        print("digits: {" + ",".join(str(x) for x in enc.msb_first()) + "}")
        print(f"{lead}: {enc.carry_out if args.unsigned else enc.sign}")
        terms = " + ".join(f"({w})*4^{i}" for i, w in reversed(list(enumerate(enc.digits))))
        print(f"weighted sum: {terms} = {ent_decode(enc)}")
    count, bits = encoded_width(n, args.scheme)
    print(f"encoders: {count}")
    print(f"width: {bits}")
    return EXIT_OK


def cmd_verify(args) -> int:
    n = args.width
    encoded_width(n, Scheme.OURS)  # width validation
    lo, hi = -(1 << (n - 1)), (1 << (n - 1)) - 1
    if args.sampled is None and not args.exhaustive and n > 10:
        args.sampled = 10_000
    if args.sampled is not None:
        rng = random.Random(args.seed)
        pairs = [(rng.randint(lo, hi), rng.randint(lo, hi)) for _ in range(args.sampled)]
        values = sorted({a for a, _ in pairs})
    else:
        values = range(lo, hi + 1)
        pairs = ((a, b) for a in values for b in values)
    checked = mismatches = 0
    for a, b in pairs:
        checked += 1
        want = a * b
        if mbe_multiply(a, b, n).product != want or ent_multiply(a, b, n).product != want:
            mismatches += 1
    roundtrip = 0
    for v in values:
        u = v & ((1 << n) - 1)
        if ent_decode(ent_encode_unsigned(u, n)) != u or ent_decode(ent_encode_signed(v, n)) != v:
            roundtrip += 1
    print(f"width {n}: {checked} products checked, {mismatches} mismatches")
    print(f"width {n}: {len(values)} encodings round-tripped, {roundtrip} mismatches")
    return EXIT_MISMATCH if mismatches or roundtrip else EXIT_OK


def _gemm_shape(text: str):
    try:
        m, k, n = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise InvalidInput(f"--gemm expects MxKxN, got {text!r}") from None
    return m, k, n


def cmd_sim(args) -> int:
    m, k, n = _gemm_shape(args.gemm)
    rng = np.random.default_rng(args.seed)
    a = rng.integers(-128, 128, size=(m, k))
    b = rng.integers(-128, 128, size=(k, n))
    want = a @ b
    rows, bad = [], 0
    for kind in _choices(args.kind, Kind, KINDS):
        for mode in _choices(args.mode, Mode, MODES):
            arrays = args.arrays if kind is Kind.CUBE_3D else 1
            cfg = ArchConfig(kind, args.size, mode, args.clock, arrays)
            c, stats = build(cfg).run_gemm(a, b)
            ok = bool((c == want).all())
            bad += not ok
            rows.append({
                "kind": kind.value, "size": cfg.size, "arrays": cfg.arrays, "mode": mode.value,
                "m": m, "k": k, "n": n,
                "cycles": stats.cycles, "closed_form_cycles": cycle_count(cfg, m, k, n),
                "mac_ops": stats.mac_ops, "encoder_invocations": stats.encoder_invocations,
                "multipliers": stats.multipliers, "boundary_encoders": stats.boundary_encoders,
                "operand_register_bits": stats.operand_register_bits,
                "accumulator_width": stats.accumulator_width, "correct": int(ok),
            })
    _emit(rows, args.out)
    return EXIT_MISMATCH if bad else EXIT_OK


def _report_row(rep) -> dict:
    return {
        "kind": rep.kind, "scale": rep.scale, "size": rep.size, "arrays": rep.arrays, "mode": rep.mode,
        "gops": _fmt(rep.gops), "area_mm2": _fmt(rep.area_mm2), "power_w": _fmt(rep.power_w),
        "area_eff": _fmt(rep.area_eff), "energy_eff": _fmt(rep.energy_eff),
        "up_ratio_area": _fmt(rep.up_ratio_area), "up_ratio_energy": _fmt(rep.up_ratio_energy),
        "provenance": rep.provenance,
    }


def cmd_cost(args) -> int:
    result = up_ratio_sweep(
        _choices(args.kinds, Kind, KINDS), _ints(args.sizes), _table(args),
        _choices(args.modes, Mode, MODES), args.clock,
    )
    _emit([_report_row(r) for r in result.reports], args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    kinds = _choices(args.kinds, Kind, KINDS)
    result = up_ratio_sweep(kinds, _ints(args.sizes), _table(args), _choices(args.modes, Mode, MODES), args.clock)
    rows = []
    for (scale, mode), (area, energy) in sorted(result.averages.items()):
        gops = scale_config(kinds[0], scale, mode, args.clock).gops
        rows.append({
            "scale": scale, "gops": _fmt(gops), "mode": mode, "kinds": len(kinds),
            "mean_up_ratio_area": _fmt(area), "mean_up_ratio_energy": _fmt(energy),
        })
    _emit(rows, args.out)
    return EXIT_OK


def cmd_soc(args) -> int:
    network = load_network(args.network)
    table = _table(args)
    rows = []
    for kind in _choices(args.kinds, Kind, KINDS):
        for mode in _choices(args.mode, Mode, MODES):
            rep = estimate_inference_energy(network, SocConfig.for_kind(kind, mode), table)
            row = {"network": Path(str(args.network)).stem, "kind": kind.value, "mode": mode.value}
            row.update({f"{c}_j": _fmt(rep.energy_j[c]) for c in CATEGORIES})
            row.update({
                "total_j": _fmt(rep.total_j),
                "compute_fraction": _fmt(rep.compute_fraction),
                "baseline_total_j": _fmt(rep.baseline_total_j),
                "reduction_ratio": _fmt(rep.reduction_ratio),
                "tcu_cycles": rep.counts.tcu_cycles,
                "encoder_activations": rep.counts.encoder_activations,
            })
            rows.append(row)
    _emit(rows, args.out)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ent-tcu", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("encode", help="show the encoded digits of one value")
    e.add_argument("value", type=int)
    e.add_argument("--width", type=int, default=8)
    e.add_argument("--scheme", choices=[s.value for s in Scheme], default="ours")
    e.add_argument("--unsigned", action="store_true")
    e.set_defaults(func=cmd_encode)

    v = sub.add_parser("verify", help="check multipliers and encoders against integer arithmetic")
    v.add_argument("--width", type=int, default=8)
    how = v.add_mutually_exclusive_group()
    how.add_argument("--exhaustive", action="store_true")
    how.add_argument("--sampled", type=int, metavar="COUNT")
    v.add_argument("--seed", type=int, default=7)
    v.set_defaults(func=cmd_verify)

    def common(sp):
        sp.add_argument("--cost-table", metavar="PATH")
        sp.add_argument("--clock", type=float, default=500.0, help="MHz")
        sp.add_argument("--out", metavar="PATH")

    s = sub.add_parser("sim", help="run a random GEMM through the stepped simulator")
    s.add_argument("--kind", default="all")
    s.add_argument("--mode", default="all")
    s.add_argument("--size", type=int, default=16)
    s.add_argument("--arrays", type=int, default=1, help="cube-3d only")
    s.add_argument("--gemm", default="16x16x16", metavar="MxKxN")
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--clock", type=float, default=500.0, help="MHz")
    s.add_argument("--out", metavar="PATH")
    s.set_defaults(func=cmd_sim)

    c = sub.add_parser("cost", help="per-configuration area/power/efficiency table")
    c.add_argument("--kinds", default="all")
    c.add_argument("--sizes", default="16,32,64")
    c.add_argument("--modes", default="all")
    common(c)
    c.set_defaults(func=cmd_cost)

    w = sub.add_parser("sweep", help="mean up-ratios across kinds per scale")
    w.add_argument("--kinds", default="all")
    w.add_argument("--sizes", default="16,32,64")
    w.add_argument("--modes", default="all")
    common(w)
    w.set_defaults(func=cmd_sweep)

    o = sub.add_parser("soc", help="single-frame SoC energy breakdown for a network")
    o.add_argument("--network", default="resnet34", help="layer-list JSON path or a shipped name")
    o.add_argument("--kinds", default="all")
    o.add_argument("--mode", default="all")
    common(o)
    o.set_defaults(func=cmd_soc)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInput, EncodingError, ConfigError, ShapeError, LayerError, TableError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
