"""
Timing-only set-associative L1 data cache with LRU replacement.
"""
from typing import List


class CacheSet:
    """Tags of one set, most recently used first."""

    def __init__(self, ways: int):
        self.ways = ways
        self.members: List[int] = []

    def touch(self, tag: int) -> bool:
        """
        Access a tag. Returns True on hit; on miss the tag is filled,
        evicting the least recently used one if the set is full.
        """
        if tag in self.members:
            self.members.remove(tag)
            self.members.insert(0, tag)
            return True
        if len(self.members) == self.ways:
            self.members.pop()
        self.members.insert(0, tag)
        return False


class Cache:
    def __init__(self, sets: int, ways: int, block_bytes: int, hit_latency: int, miss_latency: int):
        self.sets = sets
        self.ways = ways
        self.block_bytes = block_bytes
        self.hit_latency = hit_latency
        self.miss_latency = miss_latency
        self.cache_sets = [CacheSet(ways) for _ in range(sets)]
        self.fills = 0

    @classmethod
    def from_config(cls, config) -> "Cache":
        return cls(config.cache_sets, config.cache_ways, config.block_bytes,
                   config.hit_latency, config.miss_latency)

    def split_addr(self, addr: int):
        block = addr // self.block_bytes
        return block // self.sets, block % self.sets

    def access(self, addr: int) -> int:
        """
        Touch the line holding addr.

        Returns:
            int: hit_latency on a hit, miss_latency on a miss (after the fill)
        """
        tag, index = self.split_addr(addr)
        if self.cache_sets[index].touch(tag):
            return self.hit_latency
        self.fills += 1
        return self.miss_latency

    def contains(self, addr: int) -> bool:
        tag, index = self.split_addr(addr)
        return tag in self.cache_sets[index].members


def cache_access(cache: Cache, addr: int) -> int:
    """Latency of touching addr; the line is filled on a miss."""
    return cache.access(addr)
