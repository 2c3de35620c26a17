"""Plain-text network configuration files.

Format: one "key = value" pair per line, '#' starts a comment, blank lines
ignored.  Keys: layers, channels, K, N_r, N_s, T, L, L_theta, L_alpha, j,
seed.  The first layer lifts the image (in_channels 1), the remaining
layers are joint convolutions with `channels` in/out channels each.
"""

from __future__ import annotations

from .net import ConfigError, LayerSpec, NetworkConfig

_INT_KEYS = {"layers", "channels", "K", "N_r", "N_s", "L", "L_theta", "L_alpha", "seed"}
_FLOAT_KEYS = {"T", "j"}
KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS

DEFAULTS = {
    "layers": 5,
    "channels": 1,
    "K": 10,
    "N_r": 8,
    "N_s": 9,
    "T": 1.0,
    "L": 9,
    "L_theta": 4,
    "L_alpha": 1,
    "j": None,
    "seed": 0,
}


def parse_config_text(text):
    """Parse config text into a {key: value} dict (defaults filled in)."""
    values = dict(DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = int(val) if key in _INT_KEYS else float(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    return values


def network_from_values(values, max_angular=4):
    """Build a NetworkConfig from a parsed (or hand-made) value dict."""
    merged = dict(DEFAULTS)
    merged.update(values)
    unknown = set(merged) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    layers = merged["layers"]
    if layers < 1:
        raise ConfigError("layers must be >= 1")
    channels = merged["channels"]
    L_alpha = merged["L_alpha"]
    j = merged["j"]
    specs = [
        LayerSpec(
            in_channels=1,
            out_channels=channels,
            K=merged["K"],
            stencil=merged["L"],
            layer_scale=j,
        )
    ]
    for _ in range(layers - 1):
        specs.append(
            LayerSpec(
                in_channels=channels,
                out_channels=channels,
                K=merged["K"],
                stencil=merged["L"],
                L_theta=merged["L_theta"],
                L_alpha=L_alpha,
                max_angular=max_angular,
                n_scale=max(1, L_alpha),
                layer_scale=j,
            )
        )
    return NetworkConfig(
        layers=tuple(specs),
        n_rotations=merged["N_r"],
        n_scales=merged["N_s"],
        scale_range=merged["T"],
        seed=merged["seed"],
    )


def load_network_config(path):
    """Read and parse a config file into a NetworkConfig."""
    with open(path, "r", encoding="utf-8") as fh:
        return network_from_values(parse_config_text(fh.read()))


def config_echo(net):
    """The key=value lines describing a NetworkConfig (round-trips the keys)."""
    first = net.layers[0]
    joint = net.layers[1] if net.depth > 1 else None
    lines = [
        f"layers = {net.depth}",
        f"channels = {first.out_channels}",
        f"K = {first.K}",
        f"N_r = {net.n_rotations}",
        f"N_s = {net.n_scales}",
        f"T = {net.scale_range!r}",
        f"L = {first.stencil}",
        f"L_theta = {joint.L_theta if joint else 1}",
        f"L_alpha = {joint.L_alpha if joint else 1}",
        f"seed = {net.seed}",
    ]
    if first.layer_scale is not None:
        lines.append(f"j = {first.layer_scale!r}")
    return "\n".join(lines)
