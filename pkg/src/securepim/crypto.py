"""Counter-mode keystreams: share OTPs, at-rest sealing, and MAC secrets.

A keystream block is AES-128(key) applied to a 128-bit counter laid out as
little-endian fields ``version(32) || stream_id(32) || block_index(64)``;
each block yields four ring words.  Streams are addressed by a logical
64-bit element index, so regeneration is bit-exact and position-addressable.
"""

from dataclasses import dataclass

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import UnknownKeyError, VersionReuseError

STREAM_SHARE = 0   # masks for arithmetic shares
STREAM_SEAL = 1    # at-rest sealing (MAC-then-encrypt storage)
STREAM_MAC = 2     # per-operand MAC secret s

WORDS_PER_BLOCK = 4


@dataclass(frozen=True)
class OtpContext:
    """Addresses one keystream: (key, version, first element index)."""

    key_id: str
    version: int
    base_index: int = 0


class KeyStore:
    """Registered AES keys plus the consumed-context registry.

    Contexts are consumed by share creation only; regenerating a stream for
    reconstruction or sealing does not burn the version.
    """

    def __init__(self):
        self._ciphers = {}
        self._consumed = set()

    def register(self, key_id: str, key_hex: str) -> None:
        key = bytes.fromhex(key_hex)
        if len(key) != 16:
            raise ValueError("key must be 16 bytes of hex")
        self._ciphers[key_id] = Cipher(algorithms.AES(key), modes.ECB())

    def _cipher(self, key_id):
        try:
            return self._ciphers[key_id]
        except KeyError:
            raise UnknownKeyError(key_id) from None

    def consume(self, ctx: OtpContext) -> None:
        self._cipher(ctx.key_id)
        mark = (ctx.key_id, ctx.version, ctx.base_index)
        if mark in self._consumed:
            raise VersionReuseError(f"context already consumed: {mark}")
        self._consumed.add(mark)

    def _blocks(self, key_id, version, stream_id, first_block, nblocks, on_prf):
        counters = np.empty((nblocks, 2), dtype="<u8")
        counters[:, 0] = np.uint64(version & 0xFFFFFFFF) | (np.uint64(stream_id) << np.uint64(32))
        counters[:, 1] = np.arange(first_block, first_block + nblocks, dtype=np.uint64)
        enc = self._cipher(key_id).encryptor()
        out = enc.update(counters.tobytes()) + enc.finalize()
        if on_prf is not None:
            on_prf(nblocks)
        return out

    def otp_words(self, ctx: OtpContext, count: int, stream_id: int = STREAM_SHARE,
                  on_prf=None) -> np.ndarray:
        """``count`` keystream ring words starting at ctx.base_index."""
        if count < 0:
            raise ValueError("count must be >= 0")
        if count == 0:
            return np.empty(0, dtype=np.uint32)
        first_block = ctx.base_index // WORDS_PER_BLOCK
        last_block = (ctx.base_index + count - 1) // WORDS_PER_BLOCK
        raw = self._blocks(ctx.key_id, ctx.version, stream_id,
                           first_block, last_block - first_block + 1, on_prf)
        words = np.frombuffer(raw, dtype="<u4")
        off = ctx.base_index % WORDS_PER_BLOCK
        return words[off:off + count].astype(np.uint32)

    def seal(self, ctx: OtpContext, words: np.ndarray, on_prf=None) -> np.ndarray:
        """XOR with the sealing stream; an involution, so also unseals."""
        flat = np.ascontiguousarray(words, dtype=np.uint32).ravel()
        pad = self.otp_words(ctx, flat.size, stream_id=STREAM_SEAL, on_prf=on_prf)
        return (flat ^ pad).reshape(np.shape(words))

    open = seal  # XOR involution

    def derive_mac_secret(self, ctx: OtpContext, q: int, on_prf=None) -> int:
        """s in [1, q-1] from the first MAC-stream block of this context."""
        raw = self._blocks(ctx.key_id, ctx.version, STREAM_MAC,
                           ctx.base_index // WORDS_PER_BLOCK, 1, on_prf)
        return int.from_bytes(raw[:8], "little") % (q - 1) + 1
