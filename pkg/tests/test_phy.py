"""Airtime, path-loss model, range gating, and the collision model.

Airtime oracles below are hand-computed for the default radio
(2 Mbps, 192 us PHY overhead):
  546-byte frame: 4368 bits -> 2184 us payload + 192 us = 2376 us
  14-byte frame:   112 bits ->   56 us payload + 192 us =  248 us
  2,000,000 bits -> exactly 1 s payload + 192 us
"""

import math

import pytest

from vanetsim.engine import SimulationError
from vanetsim.mac import BROADCAST, DATA, MacFrame
from vanetsim.phy import RadioParams, airtime_us, received_power_dbm

from conftest import MacWorld


def test_airtime_frozen_oracles():
    p = RadioParams()
    assert airtime_us(546 * 8, p) == 2376
    assert airtime_us(14 * 8, p) == 248
    assert airtime_us(2_000_000, p) == 1_000_192


def test_airtime_rounds_up_partial_microseconds():
    p = RadioParams()
    # 3 bits at 2 Mbps = 1.5 us -> must become 2 us, never 1
    assert airtime_us(3, p) == p.phy_overhead_us + 2


def test_airtime_rejects_empty_frame():
    with pytest.raises(SimulationError):
        airtime_us(0, RadioParams())


def test_crossover_distance_default_geometry():
    p = RadioParams()
    lam = 299_792_458.0 / 2.4e9
    expected = 4 * math.pi * 1.5 * 1.5 / lam
    assert abs(p.crossover_m - expected) < 1e-9
    assert 220 < p.crossover_m < 235  # ~226 m: the 100 m gate binds first


def test_path_loss_continuous_at_crossover():
    p = RadioParams()
    dc = p.crossover_m
    below = received_power_dbm(dc * 0.999999, p)
    above = received_power_dbm(dc * 1.000001, p)
    assert abs(below - above) < 0.01


def test_two_ray_decays_12dB_per_doubling():
    p = RadioParams()
    d = p.crossover_m * 1.5
    drop = received_power_dbm(d, p) - received_power_dbm(2 * d, p)
    assert abs(drop - 40 * math.log10(2)) < 1e-9


def test_free_space_decays_6dB_per_doubling():
    p = RadioParams()
    drop = received_power_dbm(20.0, p) - received_power_dbm(40.0, p)
    assert abs(drop - 20 * math.log10(2)) < 1e-9


def test_signal_at_max_range_still_above_threshold():
    p = RadioParams()
    assert received_power_dbm(p.max_range_m, p) >= p.rx_threshold_dbm


def test_pathloss_clamps_below_one_meter():
    p = RadioParams()
    assert received_power_dbm(0.25, p) == received_power_dbm(1.0, p)
    with pytest.raises(SimulationError):
        received_power_dbm(0.0, p)


def bcast(src, payload_bytes=24):
    return MacFrame(DATA, src, BROADCAST, 0, 34, "m", payload_bytes,
                    frame_id=src + 1000)


def test_reception_within_range_and_not_beyond():
    w = MacWorld({0: (0.0, 0.0), 1: (100.0, 0.0), 2: (100.5, 0.0)})
    w.channel.transmit(w.nodes[0], bcast(0))
    w.run(10_000)
    assert w.ledger.node[1].signals_received_without_errors == 1
    assert w.ledger.node[2].signals_received_without_errors == 0
    assert w.ledger.node[2].signals_received_with_errors == 0


def test_hidden_transmitters_collide_at_common_receiver():
    # 0 and 2 are 160 m apart (mutually silent), both within 80 m of 1
    w = MacWorld({0: (0.0, 0.0), 1: (80.0, 0.0), 2: (160.0, 0.0)})
    w.sim.schedule_at(0, lambda: w.channel.transmit(w.nodes[0], bcast(0)))
    w.sim.schedule_at(10, lambda: w.channel.transmit(w.nodes[2], bcast(2)))
    w.run(100_000)
    c = w.ledger.node[1]
    assert c.signals_received_with_errors == 2
    assert c.signals_received_without_errors == 0
    # the transmitters themselves heard nothing at all
    assert w.ledger.node[0].signals_received_with_errors == 0
    assert w.ledger.node[2].signals_received_with_errors == 0


def test_sequential_frames_do_not_collide():
    w = MacWorld({0: (0.0, 0.0), 1: (80.0, 0.0), 2: (160.0, 0.0)})
    w.sim.schedule_at(0, lambda: w.channel.transmit(w.nodes[0], bcast(0)))
    w.sim.schedule_at(5_000, lambda: w.channel.transmit(w.nodes[2], bcast(2)))
    w.run(100_000)
    c = w.ledger.node[1]
    assert c.signals_received_without_errors == 2
    assert c.signals_received_with_errors == 0


def test_own_transmission_corrupts_reception_in_progress():
    w = MacWorld({0: (0.0, 0.0), 1: (50.0, 0.0)})
    w.sim.schedule_at(0, lambda: w.channel.transmit(
        w.nodes[0], bcast(0, payload_bytes=512)))  # 2376 us on air
    w.sim.schedule_at(300, lambda: w.channel.transmit(w.nodes[1], bcast(1)))
    w.run(100_000)
    assert w.ledger.node[1].signals_received_with_errors == 1
    assert w.ledger.node[1].signals_received_without_errors == 0


def test_transmit_while_transmitting_is_an_error():
    w = MacWorld({0: (0.0, 0.0), 1: (50.0, 0.0)})
    w.channel.transmit(w.nodes[0], bcast(0, payload_bytes=512))
    with pytest.raises(SimulationError):
        w.channel.transmit(w.nodes[0], bcast(0))


def test_carrier_sense_follows_channel_activity():
    w = MacWorld({0: (0.0, 0.0), 1: (50.0, 0.0)})
    assert not w.channel.carrier_busy(1)
    w.channel.transmit(w.nodes[0], bcast(0))
    assert w.channel.carrier_busy(1)
    assert w.channel.carrier_busy(0)  # own transmission counts
    w.run(100_000)
    assert not w.channel.carrier_busy(1)
