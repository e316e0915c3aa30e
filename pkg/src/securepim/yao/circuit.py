"""Boolean circuits: builder, plaintext evaluation, and the stock circuits.

Words are LSB-first wire lists.  Adders use the single-AND full adder
(carry' = c ^ ((a^c) & (b^c))); adding a known constant needs no constant
wires because each bit case simplifies to at most one AND.
"""

from dataclasses import dataclass, field

from .. import ring

XOR = "XOR"
AND = "AND"
NOT = "NOT"


@dataclass(frozen=True)
class Gate:
    op: str
    a: int
    b: int  # -1 for NOT
    out: int


@dataclass
class BoolCircuit:
    n_wires: int
    garbler_inputs: list
    evaluator_inputs: list
    gates: list
    outputs: list

    @property
    def and_count(self) -> int:
        return sum(1 for g in self.gates if g.op == AND)

    def eval_plain(self, garbler_bits, evaluator_bits):
        """Reference evaluation on plain bits; the oracle for garbling tests."""
        if len(garbler_bits) != len(self.garbler_inputs):
            raise ValueError("garbler arity mismatch")
        if len(evaluator_bits) != len(self.evaluator_inputs):
            raise ValueError("evaluator arity mismatch")
        vals = {}
        vals.update(zip(self.garbler_inputs, garbler_bits))
        vals.update(zip(self.evaluator_inputs, evaluator_bits))
        for g in self.gates:
            if g.op == XOR:
                vals[g.out] = vals[g.a] ^ vals[g.b]
            elif g.op == AND:
                vals[g.out] = vals[g.a] & vals[g.b]
            else:
                vals[g.out] = vals[g.a] ^ 1
        return [vals[w] for w in self.outputs]


class CircuitBuilder:
    def __init__(self):
        self._n = 0
        self.garbler_inputs = []
        self.evaluator_inputs = []
        self.gates = []

    def _wire(self) -> int:
        w = self._n
        self._n += 1
        return w

    def garbler_word(self, bits: int):
        ws = [self._wire() for _ in range(bits)]
        self.garbler_inputs.extend(ws)
        return ws

    def evaluator_word(self, bits: int):
        ws = [self._wire() for _ in range(bits)]
        self.evaluator_inputs.extend(ws)
        return ws

    def xor(self, a: int, b: int) -> int:
        out = self._wire()
        self.gates.append(Gate(XOR, a, b, out))
        return out

    def and_(self, a: int, b: int) -> int:
        out = self._wire()
        self.gates.append(Gate(AND, a, b, out))
        return out

    def not_(self, a: int) -> int:
        out = self._wire()
        self.gates.append(Gate(NOT, a, -1, out))
        return out

    def add_words(self, a, b):
        """Ripple-carry sum mod 2^len; one AND per bit below the MSB."""
        if len(a) != len(b):
            raise ValueError("word widths differ")
        out = []
        carry = None
        for i, (ai, bi) in enumerate(zip(a, b)):
            if carry is None:
                out.append(self.xor(ai, bi))
                carry = self.and_(ai, bi) if i < len(a) - 1 else None
            else:
                axc = self.xor(ai, carry)
                out.append(self.xor(axc, bi))
                if i < len(a) - 1:
                    bxc = self.xor(bi, carry)
                    carry = self.xor(carry, self.and_(axc, bxc))
        return out

    def add_const(self, a, const: int):
        """Sum of a word and a compile-time constant; carry logic per bit
        collapses to one AND (c=0: carry'=a&cin; c=1: carry'=a|cin)."""
        out = []
        carry = None  # None encodes a known-zero carry
        for i, ai in enumerate(a):
            bit = (const >> i) & 1
            last = i == len(a) - 1
            if carry is None:
                if bit == 0:
                    out.append(ai)
                else:
                    out.append(self.not_(ai))
                    if not last:
                        carry = ai
            else:
                s = self.xor(ai, carry)
                out.append(s if bit == 0 else self.not_(s))
                if not last:
                    if bit == 0:
                        carry = self.and_(ai, carry)
                    else:
                        carry = self.not_(self.and_(self.not_(ai), self.not_(carry)))
        return out

    def sigmoid_clamp(self, x, frac_bits: int):
        """clamp(x + 1/2, 0, 1) on a two's-complement Q(frac_bits) word.

        b1 = sign(x + 1/2), b2 = sign(x - 1/2); the middle branch selects
        v = x + 1/2 via b2 & ~b1, the high branch contributes the constant
        one; the branches are mutually exclusive so XOR realizes the sum.
        """
        half = 1 << (frac_bits - 1)
        width = len(x)
        v = self.add_const(x, half)
        w = self.add_const(x, (-half) % (1 << width))
        b1 = v[-1]
        b2 = w[-1]
        sel = self.and_(b2, self.not_(b1))
        not_b2 = self.not_(b2)
        out = []
        for i in range(width):
            t = self.and_(sel, v[i])
            out.append(self.xor(t, not_b2) if i == frac_bits else t)
        return out

    def build(self, outputs) -> BoolCircuit:
        return BoolCircuit(
            n_wires=self._n,
            garbler_inputs=list(self.garbler_inputs),
            evaluator_inputs=list(self.evaluator_inputs),
            gates=list(self.gates),
            outputs=list(outputs),
        )


def build_add_mod_circuit(word_bits: int = ring.WORD_BITS) -> BoolCircuit:
    """Garbler word R plus evaluator word C, mod 2^word_bits."""
    b = CircuitBuilder()
    r = b.garbler_word(word_bits)
    c = b.evaluator_word(word_bits)
    return b.build(b.add_words(r, c))


def build_sigmoid_circuit(word_bits: int = ring.WORD_BITS,
                          frac_bits: int = ring.FRAC_BITS) -> BoolCircuit:
    """Clamped-sigmoid on a plain evaluator-supplied word."""
    b = CircuitBuilder()
    x = b.evaluator_word(word_bits)
    return b.build(b.sigmoid_clamp(x, frac_bits))


def build_a2y_circuit(word_bits: int = ring.WORD_BITS,
                      frac_bits: int = ring.FRAC_BITS) -> BoolCircuit:
    """Reconstruct x = R + C inside the circuit, then apply the clamp."""
    b = CircuitBuilder()
    r = b.garbler_word(word_bits)
    c = b.evaluator_word(word_bits)
    x = b.add_words(r, c)
    return b.build(b.sigmoid_clamp(x, frac_bits))


def word_to_bits(word: int, bits: int):
    return [(word >> i) & 1 for i in range(bits)]


def bits_to_word(bits) -> int:
    return sum(b << i for i, b in enumerate(bits))
