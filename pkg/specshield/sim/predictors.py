"""
Indirect-branch predictors: a set-associative BTB and a bounded RAS.
"""
from collections import deque
from typing import List, Optional


class Btb:
    """
    Maps a branch pc to its last resolved target. Index = (pc >> 1) mod sets,
    tag = the bits above the index; LRU replacement within a set.
    """

    def __init__(self, sets: int = 64, ways: int = 4):
        self.sets = sets
        self.ways = ways
        self._index_bits = sets.bit_length() - 1
        # each set holds [tag, target] pairs, most recently used first
        self.entries: List[List[list]] = [[] for _ in range(sets)]

    def _split(self, pc: int):
        return (pc >> 1) % self.sets, pc >> (1 + self._index_bits)

    def lookup(self, pc: int) -> Optional[int]:
        index, tag = self._split(pc)
        for entry in self.entries[index]:
            if entry[0] == tag:
                return entry[1]
        return None

    def update(self, pc: int, target: int) -> None:
        index, tag = self._split(pc)
        members = self.entries[index]
        for pos, entry in enumerate(members):
            if entry[0] == tag:
                entry[1] = target
                members.insert(0, members.pop(pos))
                return
        if len(members) == self.ways:
            members.pop()
        members.insert(0, [tag, target])


class Ras:
    """Return address stack; overflow drops the oldest entry."""

    def __init__(self, depth: int = 8):
        self.depth = depth
        self._stack = deque(maxlen=depth)

    def push(self, addr: int) -> None:
        self._stack.append(addr)

    def pop(self) -> Optional[int]:
        return self._stack.pop() if self._stack else None

    def peek(self) -> Optional[int]:
        return self._stack[-1] if self._stack else None

    def snapshot(self) -> tuple:
        return tuple(self._stack)

    def restore(self, entries: tuple) -> None:
        self._stack = deque(entries, maxlen=self.depth)

    def __len__(self) -> int:
        return len(self._stack)
