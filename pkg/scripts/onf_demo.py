"""Lower a few expressions to loop nests and show them beside their address streams."""

import sys

from moa import reduce as rd
from moa.errors import NotReducible

EXAMPLES = [
    "(reshape (2 4) (transpose (reshape (2 4) (leaf A (8)))))",
    "(psi (2) (leaf A (4 6 7)))",
    "(reverse (take 3 (leaf A (5 2))))",
    "(rotate 1 (reshape (3 2) (leaf A (6))))",
]


def show(text):
    print(text)
    try:
        nest = rd.reduce_to_onf(rd.parse_sexpr(text))
    except NotReducible as exc:
        print(f"  not reducible: {exc}\n")
        return
    print(rd.render_onf(nest))
    print("  addresses:", nest.addresses().tolist(), "\n")


def main(argv):
    for text in argv or EXAMPLES:
        show(text)
    print("final transpose, d=5, sigma=2:")
    print(rd.render_onf(rd.final_transpose_onf(5, 2)))


if __name__ == "__main__":
    main(sys.argv[1:])
