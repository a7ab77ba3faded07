"""Relevance judgments and their text file format."""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Union

PROTOCOLS = ("holidays", "ukbench")
PROTOCOL_ALIASES = {
    "holidays": "holidays",
    "holidays-like": "holidays",
    "ukbench": "ukbench",
    "ukbench-like": "ukbench",
}


class EvaluationError(ValueError):
    """Raised for unusable ground truth or rankings."""


def resolve_protocol(name: str) -> str:
    try:
        return PROTOCOL_ALIASES[name]
    except KeyError:
        raise EvaluationError(
            f"unknown protocol {name!r}; expected one of {sorted(PROTOCOL_ALIASES)}"
        ) from None


@dataclass(frozen=True)
class GroundTruth:
    """
    Positive image ids of every query.

    Under the ``holidays`` protocol the query is removed from its own
    ranking and never listed among its positives. Under ``ukbench`` the
    query is one of its own positives.
    """

    positives: Mapping[int, FrozenSet[int]]
    protocol: str = "holidays"

    def __post_init__(self):
        protocol = resolve_protocol(self.protocol)
        cleaned: Dict[int, FrozenSet[int]] = {}
        for query, ids in self.positives.items():
            ids = frozenset(int(i) for i in ids)
            if protocol == "holidays":
                ids = ids - {int(query)}
            if not ids:
                raise EvaluationError(f"query {query} has no positives")
            cleaned[int(query)] = ids
        object.__setattr__(self, "positives", cleaned)
        object.__setattr__(self, "protocol", protocol)

    @property
    def exclude_self(self) -> bool:
        return self.protocol == "holidays"

    @property
    def queries(self) -> List[int]:
        return sorted(self.positives)

    def __len__(self) -> int:
        return len(self.positives)

    def __getitem__(self, query_id: int) -> FrozenSet[int]:
        return self.positives[query_id]

    def prepare_ranking(self, query_id: int, ranking: Iterable[int]) -> List[int]:
        ranking = [int(i) for i in ranking]
        if self.exclude_self:
            return [i for i in ranking if i != query_id]
        return ranking

    def validate_ids(self, n_images: int) -> None:
        for query, ids in self.positives.items():
            out_of_range = sorted(i for i in ids | {query} if not 0 <= i < n_images)
            if out_of_range:
                raise EvaluationError(
                    f"query {query} references ids outside the corpus of {n_images}: {out_of_range}"
                )

    @classmethod
    def from_groups(cls, groups: Sequence[Sequence[int]], protocol: str = "holidays") -> "GroundTruth":
        """
        Ground truth of planted groups.

        ``holidays``: the first member queries, the others are positives.
        ``ukbench``: every member queries, the whole group is positive.
        """
        protocol = resolve_protocol(protocol)
        positives: Dict[int, FrozenSet[int]] = {}
        for group in groups:
            members = frozenset(int(i) for i in group)
            if protocol == "holidays":
                positives[int(group[0])] = members
            else:
                for member in group:
                    positives[int(member)] = members
        return cls(positives=positives, protocol=protocol)


def read_ground_truth(path: Union[str, Path], protocol: str = "holidays") -> GroundTruth:
    """Parse ``query_id: pos_id pos_id ...`` lines; blank lines are skipped."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"ground-truth file not found: {path}")
    positives: Dict[int, FrozenSet[int]] = {}
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        head, sep, tail = line.partition(":")
        try:
            if not sep:
                raise ValueError("missing ':'")
            query = int(head.strip())
            ids = frozenset(int(token) for token in tail.split())
        except ValueError as exc:
            raise EvaluationError(f"{path}:{number}: malformed line {line!r} ({exc})") from exc
        if query in positives:
            raise EvaluationError(f"{path}:{number}: query {query} listed twice")
        positives[query] = ids
    return GroundTruth(positives=positives, protocol=protocol)


def write_ground_truth(gt: GroundTruth, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"{query}: {' '.join(str(i) for i in sorted(gt[query]))}\n" for query in gt.queries
    ]
    path.write_text("".join(lines), encoding="utf-8")
    return path
