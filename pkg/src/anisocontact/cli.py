"""Command-line driver.

Configuration is an INI-style file with the sections ``[trap]``,
``[interaction]``, ``[assembly]``, ``[states]``, ``[validity]`` and
``[output]``.  Any key may be overridden with ``--set section.key=value``;
the common ones also have dedicated flags.

Exit status: 0 on success, 1 on a domain error, 2 on a configuration error.
"""

import argparse
import configparser
import json
import math
import sys
import warnings

from .errors import DomainError
from .kmatrix import RadialPotential, born_kmatrix, isotropic, load_kmatrix, scattering_lengths
from .matel import expectation
from .operators import c_tensor_nabla, render
from .pseudopotential import (
    assemble_born,
    assemble_general,
    assemble_isotropic,
    coupling_table,
    truncated_dipolar,
)
from .states import HermiteGaussian3D
from .trap import TrapConfig, collision_momentum, validity_report

COMMANDS = ("table-i", "coupling", "assemble", "matel", "diagnose")
FORMATS = ("text", "csv", "machine", "latex")
L_MAX_LIMIT = 8

DEFAULTS = {
    "trap": {"omega_x": "1", "omega_y": "1", "omega_z": "1", "n_x": "0", "n_y": "0", "n_z": "0"},
    "interaction": {"kind": "dipolar"},
    "assembly": {"l_max": "2", "gauge": "tensor", "mode": "general"},
    "states": {},
    "validity": {"ok_below": "0.1", "invalid_at": "1.0"},
    "output": {"format": "text"},
}


class ConfigError(Exception):
    pass


# -- configuration --------------------------------------------------------------------

def load_config(path=None, overrides=()):
    cfg = configparser.ConfigParser(interpolation=None)
    cfg.read_dict(DEFAULTS)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg.read_file(fh, source=path)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except configparser.MissingSectionHeaderError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: expected a [section] header") from None
        except configparser.ParsingError as exc:
            lineno, text = exc.errors[0]
            raise ConfigError(f"{path}: line {lineno}: cannot parse {text.strip()!r}") from None
        except configparser.Error as exc:
            lineno = getattr(exc, "lineno", None)
            where = f"line {lineno}: " if lineno else ""
            raise ConfigError(f"{path}: {where}{exc.message.splitlines()[0]}") from None
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot or not name:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        if not cfg.has_section(section):
            cfg.add_section(section)
        cfg.set(section, name, value.strip())
    return cfg


def _get(cfg, section, key, conv=str, required=True):
    if not cfg.has_option(section, key):
        if required:
            raise ConfigError(f"[{section}] {key}: missing")
        return None
    raw = cfg.get(section, key)
    try:
        return conv(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"[{section}] {key}: cannot interpret {raw!r}") from None


def _int_triple(text):
    parts = [int(p) for p in text.replace(",", " ").split()]
    if len(parts) != 3:
        raise ValueError(text)
    return tuple(parts)


def _float_list(text):
    return [float(p) for p in text.replace(",", " ").split()]


def build_trap(cfg):
    vals = {k: _get(cfg, "trap", k, float) for k in ("omega_x", "omega_y", "omega_z")}
    vals.update({k: _get(cfg, "trap", k, int) for k in ("n_x", "n_y", "n_z")})
    try:
        return TrapConfig(**vals)
    except ValueError as exc:
        raise ConfigError(f"[trap] {exc}") from None


def resolve_kc(cfg, trap):
    kc = _get(cfg, "assembly", "kc", float, required=False)
    if kc is None:
        return collision_momentum(trap)
    if not (kc > 0 and math.isfinite(kc)):
        raise ConfigError(f"[assembly] kc: must be positive, got {kc!r}")
    return kc


def resolve_lmax(cfg):
    l_max = _get(cfg, "assembly", "l_max", int)
    if not 0 <= l_max <= L_MAX_LIMIT:
        raise ConfigError(f"[assembly] l_max: must be in 0..{L_MAX_LIMIT}, got {l_max}")
    return l_max


def interaction_kind(cfg):
    kind = _get(cfg, "interaction", "kind")
    if kind not in ("dipolar", "powerlaw", "isotropic", "kmatrix-file"):
        raise ConfigError(f"[interaction] kind: unknown value {kind!r}")
    return kind


def build_potential(cfg):
    kind = interaction_kind(cfg)
    if kind == "dipolar":
        return RadialPotential.dipolar(_get(cfg, "interaction", "D", float))
    if kind == "powerlaw":
        L = _get(cfg, "interaction", "L", int)
        C = _get(cfg, "interaction", "C", float)
        s = _get(cfg, "interaction", "s", float)
        try:
            return RadialPotential.power_law(L, C, s)
        except ValueError as exc:
            raise ConfigError(f"[interaction] {exc}") from None
    raise ConfigError(f"[interaction] kind: {kind!r} does not define a radial potential")


def build_kmatrix(cfg, l_max, kc):
    kind = interaction_kind(cfg)
    if kind == "isotropic":
        shifts = _get(cfg, "interaction", "phase_shifts", _float_list)
        return isotropic(shifts, kc)
    if kind == "kmatrix-file":
        path = _get(cfg, "interaction", "path")
        try:
            return load_kmatrix(path)
        except OSError as exc:
            raise ConfigError(f"[interaction] path: cannot read {path}: {exc.strerror}") from None
    return born_kmatrix(build_potential(cfg), l_max, kc)


def build_operator(cfg):
    trap = build_trap(cfg)
    kc = resolve_kc(cfg, trap)
    l_max = resolve_lmax(cfg)
    mode = _get(cfg, "assembly", "mode")
    kind = interaction_kind(cfg)
    if mode == "general":
        return assemble_general(build_kmatrix(cfg, l_max, kc), l_max, kc)
    if mode == "born":
        if kind not in ("dipolar", "powerlaw"):
            raise ConfigError(f"[assembly] mode: 'born' needs a dipolar or powerlaw interaction, not {kind!r}")
        return assemble_born(build_potential(cfg), l_max, kc)
    if mode == "isotropic":
        if kind != "isotropic":
            raise ConfigError(f"[assembly] mode: 'isotropic' needs kind = isotropic, not {kind!r}")
        return assemble_isotropic(_get(cfg, "interaction", "phase_shifts", _float_list), l_max, kc)
    if mode == "truncated":
        gauge = _get(cfg, "assembly", "gauge")
        if gauge not in ("zero", "tensor"):
            raise ConfigError(f"[assembly] gauge: must be zero or tensor, got {gauge!r}")
        a_ss, a_sd = scattering_lengths(build_kmatrix(cfg, max(l_max, 2), kc))
        return truncated_dipolar(a_ss, a_sd, kc, gauge)
    raise ConfigError(f"[assembly] mode: unknown value {mode!r}")


def build_states(cfg):
    trap = build_trap(cfg)
    bra_n = _get(cfg, "states", "bra", _int_triple, required=False)
    ket_n = _get(cfg, "states", "ket", _int_triple, required=False)
    try:
        bra = HermiteGaussian3D.from_trap(trap, bra_n)
        ket = HermiteGaussian3D.from_trap(trap, ket_n)
    except ValueError as exc:
        raise ConfigError(f"[states] {exc}") from None
    return bra, ket


# -- commands ------------------------------------------------------------------------

def cmd_table_i(cfg, fmt):
    rows = [(l, m) for l in range(3) for m in range(l, -l - 1, -1)]
    if fmt == "csv":
        lines = ["l,m,a,b,c,re,im"]
        for l, m in rows:
            for (a, b, c), v in c_tensor_nabla(l, m).sorted_items():
                lines.append(f"{l},{m},{a},{b},{c},{v.real!r},{v.imag!r}")
        return "\n".join(lines) + "\n"
    if fmt == "machine":
        chunks = []
        for l, m in rows:
            chunks.append(f"## l={l} m={m}\n" + render(c_tensor_nabla(l, m), "machine"))
        return "".join(chunks)
    out = []
    for l, m in rows:
        out.append(f"({l},{m})  {render(c_tensor_nabla(l, m), fmt).strip()}")
    return "\n".join(out) + "\n"


def cmd_coupling(cfg, fmt):
    trap = build_trap(cfg)
    kc = resolve_kc(cfg, trap)
    l_max = resolve_lmax(cfg)
    table = coupling_table(build_kmatrix(cfg, l_max, kc), l_max, kc)
    if fmt == "text":
        return table.to_text()
    if fmt in ("csv", "machine"):
        return table.to_csv()
    raise ConfigError(f"format {fmt!r} is not available for coupling")


def cmd_assemble(cfg, fmt):
    op = build_operator(cfg)
    if fmt == "csv":
        lines = ["J,l,lp,T,bra,ket,re,im"]
        for b in op.blocks:
            for (bi, ki), v in b.op.sorted_items():
                lines.append(f"{b.J},{b.l},{b.l_p},{b.T!r},{':'.join(map(str, bi))},"
                             f"{':'.join(map(str, ki))},{v.real!r},{v.imag!r}")
        return "\n".join(lines) + "\n"
    return op.to_text(fmt)


def cmd_matel(cfg, fmt):
    op = build_operator(cfg)
    bra, ket = build_states(cfg)
    res = expectation(op, bra, ket)
    if fmt == "machine":
        lines = [f"total {res.value.real!r} {res.value.imag!r}"]
        lines += [f"block {J} {l} {lp} {v.real!r} {v.imag!r}" for (J, l, lp), v in res.blocks]
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        lines = ["J,l,lp,re,im"]
        lines += [f"{J},{l},{lp},{v.real!r},{v.imag!r}" for (J, l, lp), v in res.blocks]
        lines.append(f"total,,,{res.value.real!r},{res.value.imag!r}")
        return "\n".join(lines) + "\n"
    lines = [f"bra n={bra.n} ket n={ket.n} kc={op.k_c:.12g} provenance={op.provenance}"]
    lines += [f"  J={J} l={l} lp={lp}: {v.real + 0.0:.12g} {v.imag + 0.0:+.3g}i" for (J, l, lp), v in res.blocks]
    lines.append(f"value = {res.value.real + 0.0:.12g} {res.value.imag + 0.0:+.3g}i")
    return "\n".join(lines) + "\n"


def cmd_diagnose(cfg, fmt):
    trap = build_trap(cfg)
    V = build_potential(cfg)
    report = validity_report(trap, V, _get(cfg, "validity", "ok_below", float),
                             _get(cfg, "validity", "invalid_at", float))
    kc = resolve_kc(cfg, trap)
    if fmt == "machine":
        record = dict(report.to_record(), k_c=kc)
        return json.dumps(record, sort_keys=True) + "\n"
    return f"k_c = {kc!r}\n" + report.to_text()


HANDLERS = {
    "table-i": cmd_table_i,
    "coupling": cmd_coupling,
    "assemble": cmd_assemble,
    "matel": cmd_matel,
    "diagnose": cmd_diagnose,
}


def build_parser():
    p = argparse.ArgumentParser(prog="anisocontact",
                                description="Anisotropic contact pseudopotentials for trapped pairs.")
    p.add_argument("command", choices=COMMANDS, help=(
        "table-i: C-tensor operators for l <= 2; coupling: T_J coefficients; "
        "assemble: pseudopotential blocks; matel: matrix element between trap states; "
        "diagnose: validity of the contact description"))
    p.add_argument("--config", help="INI-style run configuration")
    p.add_argument("--output", help="write the result here instead of stdout")
    p.add_argument("--format", choices=FORMATS, help="output format")
    p.add_argument("--lmax", type=int, help="maximal partial wave (<= 8)")
    p.add_argument("--gauge", choices=("zero", "tensor"), help="truncated-dipolar gauge")
    p.add_argument("--kc", type=float, help="collision momentum, overriding the trap value")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override any config entry (repeatable)")
    return p


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    for flag, key in ((args.lmax, "assembly.l_max"), (args.gauge, "assembly.gauge"),
                      (args.kc, "assembly.kc"), (args.format, "output.format"),
                      (args.output, "output.path")):
        if flag is not None:
            overrides.append(f"{key}={flag!r}" if isinstance(flag, float) else f"{key}={flag}")
    try:
        cfg = load_config(args.config, overrides)
        fmt = _get(cfg, "output", "format")
        if fmt not in FORMATS:
            raise ConfigError(f"[output] format: unknown value {fmt!r}")
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            text = HANDLERS[args.command](cfg, fmt)
        path = _get(cfg, "output", "path", required=False)
        if path:
            try:
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(text)
            except OSError as exc:
                raise ConfigError(f"[output] path: cannot write {path}: {exc.strerror}") from None
        else:
            stdout.write(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return 2
    except DomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
