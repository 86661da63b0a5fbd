"""Fixed-width big-endian byte encoding shared by every serialized object."""

import struct


class DecodeError(ValueError):
    """Raised when a byte string is truncated or otherwise malformed."""


class Writer:
    def __init__(self):
        self._buf = bytearray()

    def u8(self, v):
        self._buf += struct.pack(">B", v)
        return self

    def u16(self, v):
        self._buf += struct.pack(">H", v)
        return self

    def u32(self, v):
        self._buf += struct.pack(">I", v)
        return self

    def u64(self, v):
        self._buf += struct.pack(">Q", v)
        return self

    def uint(self, v, width):
        self._buf += int(v).to_bytes(width, "big")
        return self

    def raw(self, data):
        self._buf += data
        return self

    def blob(self, data):
        """Length-prefixed (u32) byte string."""
        self.u32(len(data))
        self._buf += data
        return self

    def getvalue(self):
        return bytes(self._buf)


class Reader:
    def __init__(self, data):
        self._data = memoryview(bytes(data))
        self._pos = 0

    def _take(self, n):
        if n < 0 or self._pos + n > len(self._data):
            raise DecodeError(f"need {n} bytes at offset {self._pos}, have {len(self._data) - self._pos}")
        out = self._data[self._pos:self._pos + n].tobytes()
        self._pos += n
        return out

    def u8(self):
        return self._take(1)[0]

    def u16(self):
        return struct.unpack(">H", self._take(2))[0]

    def u32(self):
        return struct.unpack(">I", self._take(4))[0]

    def u64(self):
        return struct.unpack(">Q", self._take(8))[0]

    def uint(self, width):
        return int.from_bytes(self._take(width), "big")

    def raw(self, n):
        return self._take(n)

    def blob(self):
        return self._take(self.u32())

    def count(self, limit=1 << 20):
        n = self.u32()
        if n > limit:
            raise DecodeError(f"count {n} exceeds limit {limit}")
        return n

    @property
    def remaining(self):
        return len(self._data) - self._pos

    def expect_end(self):
        if self.remaining:
            raise DecodeError(f"{self.remaining} trailing bytes")
