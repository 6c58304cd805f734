"""``key = value`` settings file; every key can also be given on the command line."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path

from .clp import PhraseConfig, Resources
from .trainer import TrainingConfig

TRAINING_KEYS = {f.name: f.type for f in fields(TrainingConfig)}
PHRASE_KEYS = {"phrase_delta": "delta", "phrase_threshold": "threshold", "phrase_max_passes": "max_passes"}
PATH_KEYS = ("store_root", "stoplist", "lemma_dictionary", "pos_dictionary")
KEYS = (*PATH_KEYS, "listen", *TRAINING_KEYS, *PHRASE_KEYS)

_CASTS = {"int": int, "float": float}


@dataclass
class Settings:
    store_root: str = "./store"
    stoplist: str | None = None
    lemma_dictionary: str | None = None
    pos_dictionary: str | None = None
    listen: str = "127.0.0.1:8080"
    training: TrainingConfig = field(default_factory=TrainingConfig)
    phrases: PhraseConfig = field(default_factory=PhraseConfig)

    @classmethod
    def from_mapping(cls, values: dict) -> "Settings":
        unknown = set(values) - set(KEYS)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        plain = {k: str(values[k]) for k in (*PATH_KEYS, "listen") if values.get(k) is not None}
        training = {k: _CASTS[TRAINING_KEYS[k]](values[k]) for k in TRAINING_KEYS if values.get(k) is not None}
        phrases = {name: _CASTS["int" if name == "max_passes" else "float"](values[k])
                   for k, name in PHRASE_KEYS.items() if values.get(k) is not None}
        return cls(**plain, training=TrainingConfig(**training), phrases=PhraseConfig(**phrases))

    def resources(self) -> Resources:
        if not (self.stoplist or self.lemma_dictionary or self.pos_dictionary):
            return Resources.default()
        return Resources.from_files(self.stoplist, self.lemma_dictionary, self.pos_dictionary)

    @property
    def host_port(self) -> tuple[str, int]:
        host, _, port = self.listen.rpartition(":")
        return host or "127.0.0.1", int(port)


def read_config(path) -> dict:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    parser.optionxform = str
    parser.read_string("[settings]\n" + Path(path).read_text(encoding="utf-8"))
    return dict(parser["settings"])


def load_settings(path=None, overrides: dict | None = None) -> Settings:
    values = read_config(path) if path else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return Settings.from_mapping(values)
