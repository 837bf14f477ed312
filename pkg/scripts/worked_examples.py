"""Print the worked examples: index arithmetic, blocking permutations, t_j and gate vectors."""

import numpy as np

from moa import core, fft, qsim


def main():
    a = core.reshape((3, 5, 4), core.iota(60))
    print("gamma(<2 1 3>, <3 5 4>) =", core.gamma((2, 1, 3), (3, 5, 4)))
    print("<2 1> psi A =", core.psi((2, 1), a).data.tolist())
    r = core.omega_binary(lambda k, v: core.rotate(k.item(), v), (0, 1), core.vector([2, 1]),
                          core.array([[1, 2, 3, 4], [5, 6, 7, 8]]))
    print("<2 1> rotate over rows:", r.to_numpy().tolist())

    once = fft.reshape_transpose(np.arange(32), 4)
    print("\nreshape-transpose of iota 32, c=4:\n", once.reshape(8, 4))
    print("applied again:\n", fft.reshape_transpose(once, 4).reshape(8, 4))

    print("\nt_j for l=8:")
    for j in range(8):
        print(f"  j={j}:", fft.hypercube_tj(8, j))

    for bits in [(0, 2), (1, 2)]:
        t = qsim.gate_permutation(4, bits).t
        print(f"\ngate bits {bits}: <{' '.join(map(str, t))}>")


if __name__ == "__main__":
    main()
