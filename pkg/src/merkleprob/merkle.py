"""Merkle trees over truncated hashes.

Internal nodes hash the concatenated lowercase-hex text of their children:
``node = H(hex(left) + hex(right))``. Levels with an odd node count pair the
last node with itself. A single-leaf tree's root is the leaf hash.
"""
from __future__ import annotations

import base64
import binascii
import enum
import json
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from .digest import Data, Digest, HashAlgorithm, HashConfig, truncated_hash
from .errors import DomainError, FormatError


class Direction(str, enum.Enum):
    """Side on which the sibling sits relative to the running hash."""

    LEFT = "L"
    RIGHT = "R"


def hash_pair(left: Digest, right: Digest, config: HashConfig) -> Digest:
    return truncated_hash((left.hex() + right.hex()).encode("ascii"), config)


@dataclass(frozen=True)
class MerklePath:
    siblings: tuple[Digest, ...]
    directions: Optional[tuple[Direction, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "siblings", tuple(self.siblings))
        if self.directions is not None:
            dirs = tuple(Direction(d) for d in self.directions)
            if len(dirs) != len(self.siblings):
                raise DomainError("directions and siblings differ in length")
            object.__setattr__(self, "directions", dirs)
        if len({s.m for s in self.siblings}) > 1:
            raise DomainError("sibling digests have mixed bit lengths")

    def __len__(self) -> int:
        return len(self.siblings)


@dataclass(frozen=True)
class MerkleTree:
    levels: tuple[tuple[Digest, ...], ...]
    config: HashConfig
    leaves: tuple[bytes, ...]

    @property
    def leaf_count(self) -> int:
        return len(self.leaves)

    @property
    def root(self) -> Digest:
        return self.levels[-1][0]

    @property
    def height(self) -> int:
        return len(self.levels) - 1


@dataclass(frozen=True)
class MerkleProof:
    leaf: bytes
    path: MerklePath
    root: Digest
    config: HashConfig = field(default_factory=HashConfig)


def build_tree(leaves: Sequence[Data], config: HashConfig = HashConfig()) -> MerkleTree:
    if not leaves:
        raise DomainError("cannot build a Merkle tree from zero leaves")
    raw = tuple(d.encode("utf-8") if isinstance(d, str) else bytes(d) for d in leaves)
    level = tuple(truncated_hash(d, config) for d in raw)
    levels = [level]
    while len(level) > 1:
        nxt = []
        for i in range(0, len(level), 2):
            left = level[i]
            right = level[i + 1] if i + 1 < len(level) else left
            nxt.append(hash_pair(left, right, config))
        level = tuple(nxt)
        levels.append(level)
    return MerkleTree(tuple(levels), config, raw)


def generate_proof(tree: MerkleTree, index: int) -> MerkleProof:
    if isinstance(index, bool) or not 0 <= index < tree.leaf_count:
        raise DomainError(f"leaf index {index} out of range [0, {tree.leaf_count})")
    siblings = []
    directions = []
    pos = index
    for level in tree.levels[:-1]:
        if pos % 2 == 0:
            sib = level[pos + 1] if pos + 1 < len(level) else level[pos]
            directions.append(Direction.RIGHT)
        else:
            sib = level[pos - 1]
            directions.append(Direction.LEFT)
        siblings.append(sib)
        pos //= 2
    path = MerklePath(tuple(siblings), tuple(directions))
    return MerkleProof(tree.leaves[index], path, tree.root, tree.config)


def _check_bits(config: HashConfig, digests: Sequence[Digest]) -> None:
    bad = sorted({d.m for d in digests if d.m != config.m})
    if bad:
        raise DomainError(f"digest bit lengths {bad} do not match m={config.m}")


def fold_path(data: Data, path: MerklePath, config: HashConfig) -> Digest:
    """Recompute a root from leaf data, honouring direction flags.

    Missing directions mean every sibling is on the right.
    """
    _check_bits(config, path.siblings)
    running = truncated_hash(data, config)
    dirs = path.directions or (Direction.RIGHT,) * len(path.siblings)
    for sib, side in zip(path.siblings, dirs):
        if side is Direction.RIGHT:
            running = hash_pair(running, sib, config)
        else:
            running = hash_pair(sib, running, config)
    return running


def verify_proof(proof: MerkleProof) -> bool:
    _check_bits(proof.config, (proof.root,))
    return fold_path(proof.leaf, proof.path, proof.config) == proof.root


def chain_root(data: Data, path: MerklePath | Sequence[Digest], config: HashConfig = HashConfig()) -> Digest:
    """Direction-less left fold: ``r = H(d)``, then ``r = H(hex(r) + hex(h_j))``.

    Any direction flags on ``path`` are ignored.
    """
    siblings = path.siblings if isinstance(path, MerklePath) else tuple(path)
    _check_bits(config, siblings)
    running = truncated_hash(data, config)
    for sib in siblings:
        running = hash_pair(running, sib, config)
    return running


# Proof file format

def proof_to_dict(proof: MerkleProof) -> dict[str, Any]:
    try:
        leaf_text = proof.leaf.decode("utf-8")
        encoding = "utf8"
    except UnicodeDecodeError:
        leaf_text = base64.b64encode(proof.leaf).decode("ascii")
        encoding = "base64"
    doc: dict[str, Any] = {
        "algorithm": proof.config.algorithm.value,
        "m": proof.config.m,
        "leaf_encoding": encoding,
        "leaf": leaf_text,
        "siblings": [s.hex() for s in proof.path.siblings],
    }
    if proof.path.directions is not None:
        doc["directions"] = [d.value for d in proof.path.directions]
    doc["root"] = proof.root.hex()
    return doc


def proof_from_dict(doc: Any) -> MerkleProof:
    if not isinstance(doc, dict):
        raise FormatError("proof document must be a JSON object")
    required = ("algorithm", "m", "leaf_encoding", "leaf", "siblings", "root")
    missing = [k for k in required if k not in doc]
    if missing:
        raise FormatError(f"proof is missing fields: {', '.join(missing)}")
    unknown = set(doc) - set(required) - {"directions"}
    if unknown:
        raise FormatError(f"unknown proof fields: {', '.join(sorted(unknown))}")
    if doc["algorithm"] not in {a.value for a in HashAlgorithm}:
        raise FormatError(f"unknown algorithm {doc['algorithm']!r}")
    m = doc["m"]
    if isinstance(m, bool) or not isinstance(m, int):
        raise FormatError("m must be an integer")
    config = HashConfig(HashAlgorithm(doc["algorithm"]), m)

    leaf = doc["leaf"]
    if not isinstance(leaf, str):
        raise FormatError("leaf must be a string")
    if doc["leaf_encoding"] == "utf8":
        leaf_bytes = leaf.encode("utf-8")
    elif doc["leaf_encoding"] == "base64":
        try:
            leaf_bytes = base64.b64decode(leaf, validate=True)
        except binascii.Error as exc:
            raise FormatError(f"bad base64 leaf: {exc}") from None
    else:
        raise FormatError(f"unknown leaf_encoding {doc['leaf_encoding']!r}")

    sibs = doc["siblings"]
    if not isinstance(sibs, list) or not all(isinstance(s, str) for s in sibs):
        raise FormatError("siblings must be a list of hex strings")
    siblings = tuple(Digest.from_hex(s, m) for s in sibs)

    directions = None
    if "directions" in doc:
        raw = doc["directions"]
        if not isinstance(raw, list) or any(d not in ("L", "R") for d in raw):
            raise FormatError('directions must be a list of "L"/"R"')
        if len(raw) != len(siblings):
            raise FormatError("directions and siblings differ in length")
        directions = tuple(Direction(d) for d in raw)

    if not isinstance(doc["root"], str):
        raise FormatError("root must be a hex string")
    root = Digest.from_hex(doc["root"], m)
    return MerkleProof(leaf_bytes, MerklePath(siblings, directions), root, config)


def dumps_proof(proof: MerkleProof) -> str:
    return json.dumps(proof_to_dict(proof), indent=2) + "\n"


def loads_proof(text: str) -> MerkleProof:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"proof is not valid JSON: {exc}") from None
    return proof_from_dict(doc)
