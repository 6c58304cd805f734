"""Synthetic Ukrainian-like patent collections with disjoint topic vocabularies."""

from __future__ import annotations

import random
from dataclasses import dataclass

TOPICS = {
    "vymiriuvannia": {
        "ipc_class": "G01N",
        "words": (
            "датчик сенсор вимірювання тиск температура сигнал підсилювач перетворювач "
            "електрод напруга струм калібрування похибка частота генератор резистор "
            "конденсатор мікроконтролер індикатор шкала зонд вібрація імпульс фільтр"
        ).split(),
        "phrases": ["ємнісний датчик", "вимірювальний міст"],
    },
    "khimiia": {
        "ipc_class": "C07C",
        "words": (
            "розчин реагент каталізатор кислота полімер синтез осад суміш розчинник "
            "молекула реакція нагрівання кристалізація фракція емульсія гідроліз "
            "екстракт сорбент речовина концентрат окиснення етанол сіль луг"
        ).split(),
        "phrases": ["органічний розчинник", "ізотермічна витримка"],
    },
}

FILLERS = "що для в на і та який з при до".split()


@dataclass(frozen=True)
class SyntheticPatent:
    id: str
    topic: str
    title: str
    ipc_class: str
    text: str


def _sentence(rng: random.Random, topic: dict) -> str:
    words = [rng.choice(topic["words"]) for _ in range(rng.randint(5, 8))]
    if rng.random() < 0.5:
        words.insert(rng.randrange(len(words) + 1), rng.choice(topic["phrases"]))
    for _ in range(rng.randint(1, 3)):
        words.insert(rng.randrange(1, len(words) + 1), rng.choice(FILLERS))
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def make_text(rng: random.Random, topic: str, n_sentences: int) -> str:
    return " ".join(_sentence(rng, TOPICS[topic]) for _ in range(n_sentences))


def make_patents(seed: int = 0, per_topic: int = 10, n_sentences: int = 50) -> list[SyntheticPatent]:
    rng = random.Random(seed)
    patents = []
    for t, (topic, spec) in enumerate(TOPICS.items(), 1):
        for n in range(per_topic):
            pid = f"c{t}-{n:02d}"
            patents.append(SyntheticPatent(pid, topic, f"Винахід {pid}", spec["ipc_class"],
                                           make_text(rng, topic, n_sentences)))
    return patents
