"""Plain-text configuration parsing and echo round-trips."""

import pytest

from rstcnn import ConfigError, config_echo, load_network_config, parse_config_text
from rstcnn.config import DEFAULTS, network_from_values


def test_defaults_fill_missing_keys():
    values = parse_config_text("")
    assert values == DEFAULTS
    net = network_from_values(values)
    assert net.depth == 5
    assert net.n_rotations == 8 and net.n_scales == 9
    assert net.layers[0].in_channels == 1
    assert net.layers[1].L_theta == 4 and net.layers[1].L_alpha == 1


def test_parse_comments_blanks_and_values():
    text = """
    # a comment line
    layers = 2
    K = 5          # trailing comment
    T = 0.5

    L_alpha=3
    """
    values = parse_config_text(text)
    assert values["layers"] == 2
    assert values["K"] == 5
    assert values["T"] == 0.5
    assert values["L_alpha"] == 3
    assert values["N_r"] == DEFAULTS["N_r"]
    net = network_from_values(values)
    assert net.layers[1].L_alpha == 3
    assert net.layers[1].n_scale == 3
    assert net.scale_range == 0.5


def test_parse_errors_name_line_numbers():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text("layers = 2\nno equals sign here")
    with pytest.raises(ConfigError, match="line 1: unknown key 'pitch'"):
        parse_config_text("pitch = 3")
    with pytest.raises(ConfigError, match="line 3: bad value for K"):
        parse_config_text("layers = 2\n\nK = many")


def test_network_from_values_rejects_bad_shapes():
    with pytest.raises(ConfigError):
        network_from_values({"layers": 0})
    with pytest.raises(ConfigError):
        network_from_values({"L": 8})  # even stencil
    with pytest.raises(ConfigError):
        network_from_values({"L_theta": 3})  # does not divide N_r = 8
    with pytest.raises(ConfigError):
        network_from_values({"bogus": 1})


def test_echo_round_trips():
    net = network_from_values({"layers": 3, "channels": 2, "K": 5, "T": 0.75, "seed": 7})
    echoed = parse_config_text(config_echo(net))
    net2 = network_from_values(echoed)
    assert net2 == net


def test_echo_round_trips_explicit_layer_scale():
    net = network_from_values({"layers": 2, "j": 2.5})
    assert "j = 2.5" in config_echo(net)
    net2 = network_from_values(parse_config_text(config_echo(net)))
    assert net2 == net
    assert net2.layers[0].resolved_scale == 2.5


def test_load_network_config_reads_files(tmp_path):
    path = tmp_path / "net.cfg"
    path.write_text("layers = 2\nchannels = 2\nK = 5\nL = 5\n")
    net = load_network_config(path)
    assert net.depth == 2
    assert net.layers[0].K == 5
    assert net.layers[0].stencil == 5
    assert net.layers[1].out_channels == 2
