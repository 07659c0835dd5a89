import pytest
from fpradar.lib import const
from fpradar.lib.config import EmbedSettings, PipelineConfig
from fpradar.utils import get_config


def test_packaged_config():
    config = PipelineConfig.from_dict(get_config(None))
    assert config.window == (2010, 2019)
    assert config.years[0] == 2010 and len(config.years) == 10
    assert config.theta == 0.2
    assert config.split_fraction == pytest.approx(1 / 3)
    assert config.feature_sets == const.FEATURE_SETS
    assert config.primary_feature_set == const.FEATURES_COMB
    assert config.embed == EmbedSettings()
    assert config.forest.n_trees == 100
    assert config.cdx[const.CONFIG_RATE_LIMIT] == 1.0


def test_window_is_required():
    with pytest.raises(ValueError, match='doesn\'t contain window'):
        PipelineConfig.from_dict({})
    with pytest.raises(ValueError, match='window.last_year'):
        PipelineConfig.from_dict({'window': {'first_year': 2010}})


@pytest.mark.parametrize('config, message', [
        ({'stages': {'clustering': True}}, 'Unknown stage flags'),
        ({'embed': {'size': 8}}, 'Unknown EmbedSettings keys'),
        ({'stages': {'embedding': False}}, 'need the embedding stage'),
        ({'thresholds': {'theta': 1.5}}, 'theta'),
        ({'extract': {'mode': 'regex'}}, 'Unknown extraction mode'),
        ({'window': {'first_year': 2015, 'last_year': 2012}}, 'Empty study window'),
        ])
def test_invalid_configs(config, message):
    data = {'window': {'first_year': 2010, 'last_year': 2014}}
    data.update(config)
    with pytest.raises(ValueError, match=message):
        PipelineConfig.from_dict(data)


def test_hand_only_without_embedding():
    config = PipelineConfig.from_dict({'window': {'first_year': 2010, 'last_year': 2014},
                                       'stages': {'embedding': False, 'feature_sets': ['hand']}})
    assert config.primary_feature_set == const.FEATURES_HAND


def test_replace_keeps_unset_values():
    config = PipelineConfig((2010, 2014), seed=3)
    changed = config.replace(seed=None, jobs=4, output_dir=None)
    assert (changed.seed, changed.jobs, changed.output_dir) == (3, 4, 'fpradar-out')
    assert config.digest() == PipelineConfig((2010, 2014), seed=3).digest()
    assert config.digest() != changed.digest()
