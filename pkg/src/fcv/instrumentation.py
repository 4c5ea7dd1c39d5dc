"""Operation counters proving that partial decode does no pixel work.

The decoder-side pixel paths (inverse DCT, motion compensation, frame
reconstruction) tick these counters.  Partial extraction must leave them
untouched; tests assert that.
"""

from dataclasses import dataclass


@dataclass
class OpCounters:
    idct_calls: int = 0
    pixel_writes: int = 0

    def reset(self):
        self.idct_calls = 0
        self.pixel_writes = 0

    def snapshot(self):
        return (self.idct_calls, self.pixel_writes)


counters = OpCounters()
