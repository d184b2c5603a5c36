import sys
import os
import json
import pytest

# Add project root to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import pandas as pd

import cli
from cli import run, main, build_parser, RUNNERS
from config import VALIDATION_RULES
from reproduction_checks import CheckResult, check_capacity, run_reproduction_suite


@pytest.fixture
def scenario(tmp_path):
    """Write a scenario JSON file under tmp_path and return its path."""
    def _write(config, name='scenario.json'):
        path = tmp_path / name
        path.write_text(json.dumps(config))
        return str(path)
    return _write


def read_summary(out_dir, subcommand):
    """Parse ``<subcommand>.summary.txt`` into a dict of strings."""
    with open(os.path.join(out_dir, f"{subcommand}.summary.txt")) as f:
        return dict(line.rstrip('\n').split(': ', 1) for line in f if line.strip())


def test_every_subcommand_has_a_runner():
    assert sorted(RUNNERS) == sorted(VALIDATION_RULES['subcommands'])


def test_capacity_outputs(tmp_path, capsys):
    out = str(tmp_path / 'out')
    assert run('capacity', None, out) == 0
    for suffix in ('csv', 'summary.txt', 'config.json'):
        assert os.path.exists(os.path.join(out, f"capacity.{suffix}"))
    summary = read_summary(out, 'capacity')
    assert summary['capacity_particles'] == '3816793'
    assert summary['fill_days'] == '722.877'
    assert 'capacity_particles: 3816793' in capsys.readouterr().out


def test_yield_exact_mode(tmp_path):
    out = str(tmp_path)
    assert main(['yield', '--out', out, '--mode', 'exact']) == 0
    with open(os.path.join(out, 'yield.csv')) as f:
        header = f.readline().strip()
    assert header == 'throughput_m3s,volume_m3,expected,band_lo,band_hi,observed,ratio,observed_lo,observed_hi'
    assert abs(int(read_summary(out, 'yield')['expected']) - 3458) <= 1


def test_missing_config_exits_2(tmp_path, capsys):
    code = run('ballast', str(tmp_path / 'nope.json'), str(tmp_path))
    assert code == 2
    assert 'config error' in capsys.readouterr().err
    assert not os.path.exists(os.path.join(str(tmp_path), 'ballast.csv'))


def test_invalid_config_exits_2(tmp_path, scenario):
    assert run('energy', scenario({'power': {'wattage': 50}}), str(tmp_path)) == 2


def test_model_error_exits_1_with_module_name(tmp_path, scenario, capsys):
    code = run('ballast', scenario({'stability': {'target_angle': 5.0}}), str(tmp_path))
    assert code == 1
    assert 'stability:' in capsys.readouterr().err


def test_ballast_summary(tmp_path):
    out = str(tmp_path)
    assert run('ballast', None, out) == 0
    summary = read_summary(out, 'ballast')
    assert float(summary['ballast_kg']) == pytest.approx(7.1427, abs=1e-3)
    assert float(summary['equilibrium_angle_deg']) == pytest.approx(80.0, abs=1e-3)
    assert float(summary['center_of_mass_ballast_kg']) == pytest.approx(14.0)
    assert float(summary['buoyancy_margin_kg']) == pytest.approx(52.92)


def test_deplete_erie(tmp_path, scenario):
    out = str(tmp_path)
    assert run('deplete', scenario({'lake': {'preset': 'erie'}}), out) == 0
    summary = read_summary(out, 'deplete')
    for key in ('stop_day', 'trawls', 'campaign_cost_usd', 'years', 'status'):
        assert key in summary
    assert summary['status'] == 'converged'
    assert summary['trawls'] == '802'
    assert float(summary['campaign_cost_usd']) == pytest.approx(int(summary['trawls']) * 1010.0)
    assert '1,115' in summary['bill_of_materials_note']


def test_energy_summary(tmp_path, scenario):
    out = str(tmp_path)
    assert run('energy', scenario({'power': {'peak_sun_hours': 2.0, 'days': 6}}), out) == 0
    summary = read_summary(out, 'energy')
    assert float(summary['net_wh']) == pytest.approx(-53.0)
    assert int(summary['empty_day']) <= 5


def test_navigate_is_reproducible(tmp_path, scenario):
    config = scenario({'mission': {'duration': 60.0}})
    first, second = str(tmp_path / 'a'), str(tmp_path / 'b')
    assert run('navigate', config, first, seed=4) == 0
    assert run('navigate', config, second, seed=4) == 0
    for name in ('navigate.csv', 'navigate.summary.txt', 'navigate.config.json'):
        with open(os.path.join(first, name), 'rb') as a, open(os.path.join(second, name), 'rb') as b:
            assert a.read() == b.read(), f"{name} differs between identical runs"
    with open(os.path.join(first, 'navigate.config.json')) as f:
        assert json.load(f)['mission']['seed'] == 4


def test_parser_rejects_unknown_subcommand():
    with pytest.raises(SystemExit):
        build_parser().parse_args(['plot'])
    args = build_parser().parse_args(['capacity'])
    assert args.out == 'output' and args.mode == 'paper' and args.seed is None


@pytest.mark.parametrize("config", [
    {'lake': {'fixed_trawls': 'three'}},
    {'lake': {'target_trawls': 'many'}},
    {'stability': {'valid_domain': ['a', 'b']}},
    {'mission': {'start': 'abc'}},
])
def test_mistyped_values_exit_2(tmp_path, scenario, config, capsys):
    code = run('deplete', scenario(config), str(tmp_path))
    assert code == 2
    assert 'config error' in capsys.readouterr().err
    assert not os.path.exists(os.path.join(str(tmp_path), 'deplete.csv'))


def test_all_subcommand(tmp_path):
    out = str(tmp_path)
    assert run('all', None, out) == 0
    with open(os.path.join(out, 'all.csv')) as f:
        header = f.readline().strip()
    assert header == 'criterion,check,value,expected,status'
    table = pd.read_csv(os.path.join(out, 'all.csv'))
    assert set(table['criterion']) == set(range(1, 12))
    assert (table['status'] == 'PASS').all()
    summary = read_summary(out, 'all')
    assert summary['failed'] == '0'


def test_all_subcommand_exits_1_on_failed_check(tmp_path, monkeypatch):
    def failing_check():
        return [CheckResult(1, 'always fails', 'x', 'y', False)]

    monkeypatch.setattr(cli, 'run_reproduction_suite',
                        lambda: run_reproduction_suite([failing_check, check_capacity]))
    out = str(tmp_path)
    assert run('all', None, out) == 1
    summary = read_summary(out, 'all')
    assert summary['failed'] == '1'
    assert summary['checks'] == str(1 + len(check_capacity()))
