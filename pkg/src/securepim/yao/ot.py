"""Ideal oblivious transfer over the simulated channel.

Delivers exactly label(choice) per evaluator wire and records that the
complementary label never left the host; the instrumented counter backs the
one-label-per-wire discipline checks.
"""


class IdealOT:
    def __init__(self):
        self.released = 0
        self.transfers = 0

    def transfer(self, pairs, choice_bits):
        """pairs: [(label0, label1)] per wire; one choice bit per wire."""
        if len(pairs) != len(choice_bits):
            raise ValueError("one choice bit per evaluator input wire required")
        labels = [p[b] for p, b in zip(pairs, choice_bits)]
        self.released += len(labels)
        self.transfers += 1
        return labels
