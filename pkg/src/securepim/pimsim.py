"""The untrusted device: DPU topology, ring kernels over resident shares,
a host-device channel with tamper hooks, and deterministic cost counters.

Kernels run over whichever words are resident (ciphertext shares in secure
schemes, plaintext in the baselines); partitioning across DPUs never changes
the math, only the byte accounting.  A tamper spec mutates exactly one word
at its target on the next matching access or transfer.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import CapacityError, DimensionError, TaintViolation
from .yao.garble import EvalTranscript, evaluate as gc_evaluate

ROW_SPLIT = "row-split"
COL_SPLIT = "col-split"
REPLICATE = "replicate"

TAMPER_TARGETS = ("resident_share", "channel_h2d", "channel_d2h",
                  "device_result", "gc_table")
MUTATIONS = ("bit_flip", "word_randomize")


@dataclass
class DeviceTopology:
    dpu_count: int = 4
    mram_bytes_per_dpu: int = 4 << 20   # scaled-down stand-in for 64 MiB MRAM
    tasklets_per_dpu: int = 24          # cost divisor only, never functional


@dataclass
class CostReport:
    bytes_h2d: int = 0
    bytes_d2h: int = 0
    device_mac_ops: int = 0
    host_mac_ops: int = 0
    host_prf_calls: int = 0
    device_prf_calls: int = 0
    gc_ciphertexts: int = 0
    gc_bytes: int = 0
    verify_ops: int = 0

    def as_dict(self):
        return {
            "bytes_h2d": self.bytes_h2d,
            "bytes_d2h": self.bytes_d2h,
            "device_mac_ops": self.device_mac_ops,
            "host_mac_ops": self.host_mac_ops,
            "host_prf_calls": self.host_prf_calls,
            "device_prf_calls": self.device_prf_calls,
            "gc_bytes": self.gc_bytes,
            "verify_ops": self.verify_ops,
        }


@dataclass
class TamperSpec:
    target: str
    mutation: str = "word_randomize"
    position: object = "random"   # flat word index, or "random"

    def __post_init__(self):
        if self.target not in TAMPER_TARGETS:
            raise ValueError(f"unknown tamper target {self.target!r}")
        if self.mutation not in MUTATIONS:
            raise ValueError(f"unknown mutation {self.mutation!r}")


@dataclass
class _Resident:
    data: np.ndarray
    placement: str
    secret_plaintext: bool


class PimDevice:
    def __init__(self, topology: DeviceTopology = None, report: CostReport = None,
                 seed: int = 0, secure_mode: bool = False):
        self.topology = topology or DeviceTopology()
        self.report = report if report is not None else CostReport()
        self.secure_mode = secure_mode
        self._rng = np.random.default_rng(np.random.SeedSequence([seed, 0xD17]))
        self._resident = {}
        self._armed = []
        self.tamper_log = []

    # -- tamper machinery ---------------------------------------------------

    def arm_tamper(self, spec: TamperSpec) -> None:
        self._armed.append(spec)

    def _pending(self, target):
        for i, spec in enumerate(self._armed):
            if spec.target == target:
                return self._armed.pop(i)
        return None

    def _mutate_word(self, word: int, spec: TamperSpec) -> int:
        if spec.mutation == "bit_flip":
            return word ^ (1 << int(self._rng.integers(0, 32)))
        new = int(self._rng.integers(0, 1 << 32))
        while new == word:
            new = int(self._rng.integers(0, 1 << 32))
        return new

    def _mutate_array(self, arr: np.ndarray, spec: TamperSpec) -> np.ndarray:
        out = arr.copy()
        flat = out.reshape(-1)
        if spec.position == "random":
            idx = int(self._rng.integers(0, flat.size))
        else:
            idx = int(spec.position) % flat.size
        flat[idx] = self._mutate_word(int(flat[idx]), spec)
        self.tamper_log.append(
            {"target": spec.target, "mutation": spec.mutation, "index": idx}
        )
        return out

    def _apply(self, target, arr):
        spec = self._pending(target)
        return self._mutate_array(arr, spec) if spec is not None else arr

    # -- channel ------------------------------------------------------------

    def _h2d(self, arr: np.ndarray, secret_plaintext: bool, replicate: bool = False):
        if self.secure_mode and secret_plaintext:
            raise TaintViolation("plaintext private buffer on the h2d channel")
        copies = self.topology.dpu_count if replicate else 1
        self.report.bytes_h2d += arr.nbytes * copies
        return self._apply("channel_h2d", arr)

    def _d2h(self, arr: np.ndarray) -> np.ndarray:
        arr = self._apply("device_result", arr)
        self.report.bytes_d2h += arr.nbytes
        return self._apply("channel_d2h", arr)

    # -- residency ----------------------------------------------------------

    def load(self, name: str, array: np.ndarray, placement: str = ROW_SPLIT,
             secret_plaintext: bool = False) -> str:
        array = np.ascontiguousarray(array, dtype=np.uint32)
        per_dpu = array.nbytes if placement == REPLICATE \
            else -(-array.nbytes // self.topology.dpu_count)
        used = sum(
            r.data.nbytes if r.placement == REPLICATE
            else -(-r.data.nbytes // self.topology.dpu_count)
            for r in self._resident.values()
        )
        if used + per_dpu > self.topology.mram_bytes_per_dpu:
            raise CapacityError(f"{name}: {per_dpu} B/DPU over budget")
        data = self._h2d(array, secret_plaintext,
                         replicate=placement == REPLICATE)
        self._resident[name] = _Resident(data.copy(), placement, secret_plaintext)
        return name

    def store(self, name: str, array: np.ndarray) -> None:
        """Overwrite resident words in place (layer-to-layer refresh)."""
        r = self._resident[name]
        if r.data.shape != array.shape:
            raise DimensionError("store shape mismatch")
        r.data = self._h2d(np.ascontiguousarray(array, dtype=np.uint32),
                           r.secret_plaintext)

    def _access(self, name: str) -> np.ndarray:
        r = self._resident[name]
        spec = self._pending("resident_share")
        if spec is not None:
            r.data = self._mutate_array(r.data, spec)
        return r.data

    def row_partition(self, name: str):
        """Per-DPU row slices; the partition-correctness property's subject."""
        return np.array_split(self._resident[name].data, self.topology.dpu_count)

    # -- kernels ------------------------------------------------------------

    def gemv(self, name: str, x: np.ndarray) -> np.ndarray:
        W = self._access(name)
        x = np.ascontiguousarray(x, dtype=np.uint32)
        if W.shape[1] != x.size:
            raise DimensionError(f"gemv: {W.shape} x {x.shape}")
        x = self._h2d(x, False, replicate=True)
        self.report.device_mac_ops += W.size
        return self._d2h(kernels.gemv(W, x))

    def matvec_rows(self, name: str, w: np.ndarray) -> np.ndarray:
        """Per-sample dot products X @ w over the resident rows."""
        return self.gemv(name, w)

    def matvec_cols(self, name: str, e: np.ndarray) -> np.ndarray:
        """Gradient direction X.T @ e over the resident rows."""
        X = self._access(name)
        e = np.ascontiguousarray(e, dtype=np.uint32)
        if X.shape[0] != e.size:
            raise DimensionError(f"matvec_cols: {X.shape} x {e.shape}")
        e = self._h2d(e, False, replicate=True)
        self.report.device_mac_ops += X.size
        return self._d2h(kernels.gemv_t(X, e))

    def embedding(self, name: str, ids: np.ndarray, weights: np.ndarray,
                  batch: int, pf: int) -> np.ndarray:
        table = self._access(name)
        ids = np.ascontiguousarray(ids, dtype=np.int64)
        weights = np.ascontiguousarray(weights, dtype=np.uint32)
        if ids.size != batch * pf or weights.size != ids.size:
            raise DimensionError("embedding: |ids| must equal batch * PF")
        if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
            raise IndexError("embedding id out of range")
        self.report.bytes_h2d += ids.size * 4  # indices travel in clear
        weights = self._h2d(weights, False)
        self.report.device_mac_ops += ids.size * table.shape[1]
        return self._d2h(kernels.embedding(table, ids, weights, batch, pf))

    # -- enc/dec baseline: the device holds the key, decrypts, computes on
    # plaintext, and reseals the result before it leaves (Fig. 12 style).

    def gemv_enc(self, name, sealed_x, ks, ctx_in, ctx_out):
        W = self._access(name)
        x = self._h2d(np.ascontiguousarray(sealed_x, dtype=np.uint32),
                      False, replicate=True)
        x = ks.open(ctx_in, x, on_prf=self._count_device_prf)
        if W.shape[1] != x.size:
            raise DimensionError(f"gemv_enc: {W.shape} x {x.shape}")
        self.report.device_mac_ops += W.size
        y = ks.seal(ctx_out, kernels.gemv(W, x), on_prf=self._count_device_prf)
        return self._d2h(y)

    def matvec_enc(self, name, vec, ks, ctx_mat, ctx_out, transpose=False):
        sealed = self._access(name)
        X = ks.open(ctx_mat, sealed, on_prf=self._count_device_prf)
        vec = self._h2d(np.ascontiguousarray(vec, dtype=np.uint32),
                        False, replicate=True)
        self.report.device_mac_ops += X.size
        y = kernels.gemv_t(X, vec) if transpose else kernels.gemv(X, vec)
        return self._d2h(ks.seal(ctx_out, y, on_prf=self._count_device_prf))

    def embedding_enc(self, name, ids, weights, batch, pf, ks, ctx_tab, ctx_out):
        sealed = self._access(name)
        table = ks.open(ctx_tab, sealed, on_prf=self._count_device_prf)
        ids = np.ascontiguousarray(ids, dtype=np.int64)
        weights = self._h2d(np.ascontiguousarray(weights, dtype=np.uint32), False)
        self.report.bytes_h2d += ids.size * 4
        self.report.device_mac_ops += ids.size * table.shape[1]
        out = kernels.embedding(table, ids, weights, batch, pf)
        return self._d2h(ks.seal(ctx_out, out, on_prf=self._count_device_prf))

    def unseal(self, name: str, ks, ctx) -> None:
        """pim_enc_dec: the device holds the key and decrypts in place."""
        r = self._resident[name]
        r.data = ks.open(ctx, self._access(name),
                         on_prf=self._count_device_prf)

    def seal_words(self, words: np.ndarray, ks, ctx) -> np.ndarray:
        out = ks.seal(ctx, words, on_prf=self._count_device_prf)
        return self._d2h(out)

    def _count_device_prf(self, n):
        self.report.device_prf_calls += n

    def evaluate_garbled(self, gc, input_labels, transcript: EvalTranscript = None):
        """Evaluate a garbled circuit device-side; tables count as transfer."""
        self.report.gc_ciphertexts += gc.ciphertext_count
        self.report.gc_bytes += gc.table_bytes
        self.report.bytes_h2d += gc.table_bytes + 16 * len(input_labels)
        spec = self._pending("gc_table")
        row_tamper = None
        if spec is not None:
            fired = []

            def row_tamper(gid, ridx, row):
                if fired:
                    return row
                fired.append(gid)
                bit = int(self._rng.integers(0, 256)) if spec.mutation == "bit_flip" \
                    else None
                new = row ^ (1 << bit) if bit is not None \
                    else int.from_bytes(self._rng.bytes(32), "little")
                self.tamper_log.append(
                    {"target": "gc_table", "mutation": spec.mutation,
                     "index": gid * 4 + ridx}
                )
                return new

        bits = gc_evaluate(gc, input_labels, transcript=transcript,
                           row_tamper=row_tamper)
        self.report.bytes_d2h += max(1, len(bits) // 8)
        return bits
