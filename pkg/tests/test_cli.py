"""
Tests for CSV ingestion, run configuration and the command line
"""

import json

import numpy as np
import pytest

from parsimax.core import Dataset, Estimator
from parsimax.exc import (
    ConfigError, InputFileNotFound, InvalidDataset, MissingColumn, NonNumericCell, TooFewRows,
)
from parsimax.harness import DgpConfig, generate
from parsimax.ingest import ingest_csv, write_csv
from parsimax.maxtest_cli import EXIT_DATA_ERROR, EXIT_NUMERICAL_ERROR, EXIT_OK, main
from parsimax.settings import ExperimentFile, RunSpec, load_experiment_file


@pytest.fixture
def csv_path(tmp_path):
    """Simulated H0 sample with columns y, const, w, x1..x3"""
    d = generate(DgpConfig(n=120, p=2, h=3, seed=21))
    renamed = Dataset(d.y, d.z, d.x, ('const', 'w'), ('x1', 'x2', 'x3'))
    path = tmp_path / 'sample.csv'
    write_csv(renamed, path)
    return path


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestIngest:
    """Reading datasets from CSV"""

    def test_three_rows(self, tmp_path):
        path = tmp_path / 'tiny.csv'
        path.write_text('y,z1,x1\n1,1,0.5\n2,1,-1\n3,1,2\n')
        d = ingest_csv(path, 'y', ['z1'], ['x1'])
        assert (d.n, d.p, d.h) == (3, 1, 1)
        np.testing.assert_array_equal(d.x[:, 0], [0.5, -1.0, 2.0])

    def test_column_order_follows_request(self, tmp_path):
        path = tmp_path / 'order.csv'
        path.write_text('a,b,c,y\n1,2,3,4\n5,6,7,8\n9,1,2,3\n4,4,4,4\n')
        d = ingest_csv(path, 'y', ['c'], ['b', 'a'])
        np.testing.assert_array_equal(d.x[0], [2.0, 1.0])
        assert d.x_names == ('b', 'a')

    def test_round_trip_is_exact(self, tmp_path):
        d = generate(DgpConfig(n=50, p=2, h=3, seed=5))
        path = tmp_path / 'round.csv'
        write_csv(d, path)
        back = ingest_csv(path, 'y', d.z_names, d.x_names)
        np.testing.assert_array_equal(back.y, d.y)
        np.testing.assert_array_equal(back.z, d.z)
        np.testing.assert_array_equal(back.x, d.x)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFileNotFound):
            ingest_csv(tmp_path / 'absent.csv', 'y', ['z'], ['x'])

    def test_missing_column(self, tmp_path):
        path = tmp_path / 'cols.csv'
        path.write_text('y,z1,x1\n1,1,1\n')
        with pytest.raises(MissingColumn) as info:
            ingest_csv(path, 'y', ['z1'], ['x9'])
        assert info.value.name == 'x9'

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / 'text.csv'
        path.write_text('y,z1,x1\n1,1,1\n2,1,abc\n3,1,2\n4,1,5\n')
        with pytest.raises(NonNumericCell) as info:
            ingest_csv(path, 'y', ['z1'], ['x1'])
        assert (info.value.row, info.value.column) == (2, 'x1')

    def test_empty_cell(self, tmp_path):
        path = tmp_path / 'gap.csv'
        path.write_text('y,z1,x1\n1,1,1\n2,1,\n3,1,2\n4,1,5\n')
        with pytest.raises(NonNumericCell) as info:
            ingest_csv(path, 'y', ['z1'], ['x1'])
        assert info.value.row == 2

    def test_too_few_rows(self, tmp_path):
        path = tmp_path / 'short.csv'
        path.write_text('y,z1,x1\n1,1,1\n2,1,3\n')
        with pytest.raises(TooFewRows):
            ingest_csv(path, 'y', ['z1'], ['x1'])

    def test_invalid_utf8(self, tmp_path):
        path = tmp_path / 'latin.csv'
        path.write_bytes(b'y,z1,x1\n1,1,1\n2,1,\xff\xfe\n3,1,2\n4,1,5\n')
        with pytest.raises(InvalidDataset):
            ingest_csv(path, 'y', ['z1'], ['x1'])

    def test_row_with_extra_fields(self, tmp_path):
        path = tmp_path / 'wide_row.csv'
        path.write_text('y,z,x\n1,1,1\n2,1,3\n4,1,7,99\n3,1,2\n5,1,4\n')
        with pytest.raises(InvalidDataset):
            ingest_csv(path, 'y', ['z'], ['x'])

    def test_every_row_with_extra_fields(self, tmp_path):
        path = tmp_path / 'wide.csv'
        path.write_text('y,z,x\n' + ''.join(f'{k},1,{k * k},9\n' for k in range(6)))
        with pytest.raises(InvalidDataset):
            ingest_csv(path, 'y', ['z'], ['x'])

    def test_unused_columns_are_still_read(self, tmp_path):
        path = tmp_path / 'extra_cols.csv'
        path.write_text('y,z,x,note\n1,1,1,a\n2,1,3,b\n3,1,2,c\n5,1,4,d\n')
        d = ingest_csv(path, 'y', ['z'], ['x'])
        np.testing.assert_array_equal(d.y, [1.0, 2.0, 3.0, 5.0])

    def test_empty_file(self, tmp_path):
        path = tmp_path / 'empty.csv'
        path.write_text('')
        with pytest.raises(InvalidDataset):
            ingest_csv(path, 'y', ['z'], ['x'])


class TestSettings:
    """RunSpec and experiment-file validation"""

    def test_alpha_bounds(self):
        with pytest.raises(ConfigError):
            RunSpec(command='size', alpha=1.5)

    def test_columns_disjoint(self):
        with pytest.raises(ConfigError):
            RunSpec(command='test', input_path='a.csv', y_column='y', z_columns=('c',),
                    x_columns=('c', 'x'))

    def test_test_needs_columns(self):
        with pytest.raises(ConfigError):
            RunSpec(command='test', input_path='a.csv')

    def test_unknown_command(self):
        with pytest.raises(ConfigError):
            RunSpec(command='bootstrap')

    def test_experiment_file_defaults(self):
        plan = RunSpec(command='size', seed=4)
        cfg = plan.dgp_config()
        assert (cfg.n, cfg.p, cfg.h) == (200, 2, 10)
        assert cfg.seed == 4

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / 'cfg.json'
        path.write_text(json.dumps({'replications': 10, 'colour': 'blue'}))
        with pytest.raises(ConfigError):
            load_experiment_file(str(path))

    def test_load_experiment_file(self, tmp_path):
        path = tmp_path / 'cfg.json'
        path.write_text(json.dumps({
            'dgp': {'n': 80, 'p': 1, 'h': 2, 'error_model': {'kind': 'homoscedastic', 'sigma': 2.0}},
            'replications': 10,
            'estimator': 'ghm_blockwise',
        }))
        experiment = load_experiment_file(str(path))
        assert experiment.estimator == Estimator.GHM_BLOCKWISE
        assert RunSpec(command='size', experiment=experiment).dgp_config().error_model.sigma == 2.0

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(InputFileNotFound):
            load_experiment_file(str(tmp_path / 'nope.json'))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"replications": ')
        with pytest.raises(ConfigError):
            load_experiment_file(str(path))

    def test_config_not_utf8(self, tmp_path):
        path = tmp_path / 'latin.json'
        path.write_bytes(b'{"replications": 10, "note": "\xff\xfe"}')
        with pytest.raises(ConfigError):
            load_experiment_file(str(path))

    def test_default_experiment(self):
        assert load_experiment_file(None) == ExperimentFile()


@pytest.mark.integration
class TestCommandLine:
    """End-to-end runs of the parsimax command"""

    def test_max_test_document(self, capsys, csv_path):
        code, out, _ = _run(capsys, 'test', '--input', str(csv_path), '--y', 'y', '--z', 'const,w',
                            '--x', 'x1,x2,x3', '--draws', '2000', '--seed', '3')
        assert code == EXIT_OK
        doc = json.loads(out)
        assert set(doc) == {'command', 'config_echo', 'result', 'diagnostics'}
        assert doc['command'] == 'test'
        assert doc['config_echo']['z'] == ['const', 'w']
        assert len(doc['result']['betas']) == 3
        assert 0.0 <= doc['result']['p_value'] <= 1.0
        assert doc['diagnostics']['sampler_used'] == 'cholesky'
        assert doc['diagnostics']['pd_certificate']['status'] == 'positive_definite'
        assert doc['diagnostics']['timings'] is None

    def test_output_is_byte_identical(self, capsys, csv_path, monkeypatch):
        argv = ['test', '--input', str(csv_path), '--y', 'y', '--z', 'const,w', '--x', 'x1,x2,x3',
                '--draws', '20000', '--seed', '11']
        monkeypatch.setenv('PARSIMAX_WORKERS', '1')
        _, first, _ = _run(capsys, *argv)
        monkeypatch.setenv('PARSIMAX_WORKERS', '4')
        _, second, _ = _run(capsys, *argv)
        assert first == second

    def test_floats_round_trip(self, capsys, csv_path):
        _, out, _ = _run(capsys, 'test', '--input', str(csv_path), '--y', 'y', '--z', 'const,w',
                         '--x', 'x1', '--draws', '500')
        doc = json.loads(out)
        assert float(repr(doc['result']['statistic'])) == doc['result']['statistic']

    def test_output_file(self, capsys, csv_path, tmp_path):
        target = tmp_path / 'out.json'
        code, out, _ = _run(capsys, 'test', '--input', str(csv_path), '--y', 'y', '--z', 'const',
                            '--x', 'x2', '--draws', '500', '--output', str(target))
        assert code == EXIT_OK
        assert out == ''
        assert json.loads(target.read_text())['command'] == 'test'

    def test_alpha_out_of_range(self, capsys, csv_path):
        code, out, err = _run(capsys, 'test', '--input', str(csv_path), '--y', 'y', '--z', 'const',
                              '--x', 'x1', '--alpha', '1.5')
        assert code == EXIT_DATA_ERROR
        assert out == ''
        error = json.loads(err[err.index('{\n'):])
        assert error['error'] == 'ConfigError'
        assert 'alpha' in error['message']
        assert error['exit_code'] == EXIT_DATA_ERROR

    def test_missing_column_exit_code(self, capsys, csv_path):
        code, _, err = _run(capsys, 'test', '--input', str(csv_path), '--y', 'y', '--z', 'const',
                            '--x', 'nope')
        assert code == EXIT_DATA_ERROR
        assert '"MissingColumn"' in err

    def test_invalid_utf8_exit_code(self, capsys, tmp_path):
        path = tmp_path / 'latin.csv'
        path.write_bytes(b'y,z,x\n1,1,1\n2,1,\xff\xfe\n3,1,2\n4,1,5\n')
        code, out, err = _run(capsys, 'test', '--input', str(path), '--y', 'y', '--z', 'z', '--x', 'x')
        assert code == EXIT_DATA_ERROR
        assert out == ''
        assert json.loads(err[err.index('{\n'):])['error'] == 'InvalidDataset'

    def test_extra_fields_exit_code(self, capsys, tmp_path):
        path = tmp_path / 'wide_row.csv'
        path.write_text('y,z,x\n1,1,1\n2,1,3\n1,2,3,4,5\n3,1,2\n5,1,4\n')
        code, out, err = _run(capsys, 'test', '--input', str(path), '--y', 'y', '--z', 'z', '--x', 'x')
        assert code == EXIT_DATA_ERROR
        assert out == ''
        assert json.loads(err[err.index('{\n'):])['error'] == 'InvalidDataset'

    def test_rank_deficiency_exit_code(self, capsys, tmp_path):
        path = tmp_path / 'collinear.csv'
        rows = ['y,c,w,x1'] + [f'{(k * 7) % 5},1,{k},{2 * k}' for k in range(20)]
        path.write_text('\n'.join(rows) + '\n')
        code, _, err = _run(capsys, 'test', '--input', str(path), '--y', 'y', '--z', 'c,w',
                            '--x', 'x1')
        assert code == EXIT_NUMERICAL_ERROR
        error = json.loads(err[err.index('{\n'):])
        assert error['error'] == 'StageFailure'
        assert error['cause'] == 'RankDeficient'

    def test_size_command_with_config(self, capsys, tmp_path):
        path = tmp_path / 'cfg.json'
        path.write_text(json.dumps({'dgp': {'n': 60, 'p': 2, 'h': 3}, 'replications': 8,
                                    'draws': 200, 'include_wald': True}))
        code, out, _ = _run(capsys, 'size', '--config', str(path), '--seed', '2')
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc['result']['replications'] == 8
        assert doc['config_echo']['draws'] == 200
        assert doc['result']['baseline_rejection_rate'] is not None

    def test_replications_flag_overrides_file(self, capsys):
        code, out, _ = _run(capsys, 'census', '--replications', '5')
        assert code == EXIT_OK
        assert json.loads(out)['result']['replications'] == 5

    def test_power_grid(self, capsys, tmp_path):
        path = tmp_path / 'cfg.json'
        path.write_text(json.dumps({'dgp': {'n': 60, 'p': 2, 'h': 3}, 'replications': 5,
                                    'draws': 100, 'b_grid': [0.0, 0.5]}))
        code, out, _ = _run(capsys, 'power', '--config', str(path))
        assert code == EXIT_OK
        assert [point['b'] for point in json.loads(out)['result']] == [0.0, 0.5]

    def test_consistency_command(self, capsys, tmp_path):
        path = tmp_path / 'cfg.json'
        path.write_text(json.dumps({'dgp': {'n': 60, 'p': 2, 'h': 2}, 'replications': 3,
                                    'n_grid': [50, 100]}))
        code, out, _ = _run(capsys, 'consistency', '--config', str(path))
        assert code == EXIT_OK
        assert [row['n'] for row in json.loads(out)['result']['frobenius_errors']] == [50, 100]

    def test_verify_identities(self, capsys):
        code, out, _ = _run(capsys, 'verify-identities', '--timings')
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc['result']['passed']
        assert doc['result']['representation_max_deviation'] < 1e-10
        assert 'total' in doc['diagnostics']['timings']
