"""
Experiment configuration files.

UTF-8 INI: [section] headers with key = value lines. Sections and keys must
exist in config.settings; anything else is a ConfigError. Values are coerced
to the type of their default. Command-line overrides are applied last.
"""

import configparser
import copy
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from config import settings
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


def coerce(value: str, default: Any, where: str) -> Any:
    """Parse `value` as the type of `default`"""
    text = value.strip()
    try:
        if isinstance(default, bool):
            lowered = text.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"{where}: cannot read '{value}' as {type(default).__name__}")
    return text


def parse_list(text: str, cast=float) -> List:
    try:
        return [cast(item) for item in str(text).split(',') if item.strip()]
    except ValueError:
        raise ConfigError(f"cannot read list '{text}'")


def default_sections(kind: str = 'glyph') -> Dict[str, Dict[str, Any]]:
    sections = {name: copy.deepcopy(values) for name, values in settings.SECTIONS.items()}
    if kind == 'toy':
        sections['model'].update(settings.TOY_MODEL_CONFIG)
        sections['training'].update(settings.TOY_TRAINING_CONFIG)
    return sections


@dataclass
class ExperimentConfig:
    sections: Dict[str, Dict[str, Any]] = field(default_factory=default_sections)
    source: Optional[str] = None

    def __getitem__(self, section: str) -> Dict[str, Any]:
        return self.sections[section]

    @property
    def seed(self) -> int:
        return self.sections['experiment']['seed']

    @property
    def samples(self) -> int:
        return self.sections['experiment']['samples']

    @property
    def threads(self) -> int:
        return self.sections['experiment']['threads']

    @property
    def out(self) -> str:
        return self.sections['experiment']['out']

    @property
    def dataset_kind(self) -> str:
        return self.sections['dataset']['kind']

    def hidden_dims(self) -> List[int]:
        return parse_list(self.sections['model']['hidden'], int)

    def metric_names(self) -> List[str]:
        return parse_list(self.sections['metrics']['metrics'], str)

    def set(self, section: str, key: str, value: Any):
        if section not in self.sections or key not in self.sections[section]:
            raise ConfigError(f"Unknown config key [{section}] {key}")
        self.sections[section][key] = value

    def validate(self):
        if self.dataset_kind not in ('glyph', 'toy'):
            raise ConfigError(f"[dataset] kind must be 'glyph' or 'toy', got '{self.dataset_kind}'")
        if self.samples < 1:
            raise ConfigError("[experiment] samples must be at least 1")
        if self.threads < 1:
            raise ConfigError("[experiment] threads must be at least 1")
        if self.seed < 0:
            raise ConfigError("[experiment] seed must be non-negative")
        if not self.hidden_dims():
            raise ConfigError("[model] hidden needs at least one width")
        unknown = set(self.metric_names()) - {'localization', 'faithfulness', 'robustness', 'sparseness', 'auc'}
        if unknown:
            raise ConfigError(f"[metrics] unknown metrics {sorted(unknown)}")
        if self.sections['calibration']['fg_mode'] not in ('appendix', 'halve'):
            raise ConfigError("[calibration] fg_mode must be 'appendix' or 'halve'")
        if self.sections['explainer']['shap_pool_size'] < 1:
            raise ConfigError("[explainer] shap_pool_size must be at least 1")

    def snapshot(self) -> Dict[str, Dict[str, Any]]:
        return copy.deepcopy(self.sections)


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Read an experiment file on top of the defaults. `overrides` maps
    experiment keys (seed, out, threads, samples) to values that win over the file.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if path is not None:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                parser.read_file(f)
        except OSError as e:
            raise ConfigError(f"Cannot read config file {path}: {e}")
        except configparser.Error as e:
            raise ConfigError(f"Malformed config file {path}: {e}")

    kind = parser.get('dataset', 'kind', fallback=settings.DATASET_CONFIG['kind']).strip()
    config = ExperimentConfig(default_sections(kind), source=path)

    for section in parser.sections():
        if section not in config.sections:
            raise ConfigError(f"Unknown config section [{section}]")
        defaults = config.sections[section]
        for key, value in parser.items(section):
            if key not in defaults:
                raise ConfigError(f"Unknown config key [{section}] {key}")
            defaults[key] = coerce(value, defaults[key], f"[{section}] {key}")

    for key, value in (overrides or {}).items():
        if value is not None:
            config.set('experiment', key, value)

    config.validate()
    logger.debug(f"Loaded config from {path or 'defaults'}")
    return config


def write_example_config(path: str, kind: str = 'glyph'):
    """Write every default as an editable INI file"""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for name, values in default_sections(kind).items():
        parser[name] = {key: str(value) for key, value in values.items()}
    parser['dataset']['kind'] = kind
    with open(path, 'w', encoding='utf-8') as f:
        parser.write(f)
