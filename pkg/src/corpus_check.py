#!/usr/bin/env python3
import logging
import sys

from modules.classify import (
    CLASS_NAMES,
    canonical_functorial_factorization,
    check_almost_reedy,
    check_initial_final,
    classify,
    fs_reduce,
)
from modules.config_loader import load_config
from modules.corpus import builtin, iso_pair_fs_structure, mismatches, names, rezk_enlarged_classes
from modules.factorization import boundary_hom, factorization_components

logging.basicConfig(level=logging.WARNING, format='%(message)s')
logger = logging.getLogger(__name__)


def print_status(name, ok, extra=""):
    symbol = "✅" if ok else "❌"
    print(f"{symbol} {name:<22} {extra}")


def main() -> int:
    print("\n🔧 REEDY CORPUS DIAGNOSTIC")
    print("==========================\n")

    config = load_config("reedy.json")
    max_search = int(config["MAX_SEARCH"])
    results = {}

    # ---- VERDICT MATRIX ----
    print("🧭 CLASSIFICATION\n-----------------")
    for name in names():
        entry = builtin(name)
        try:
            report = classify(entry.category, max_search)
            wrong = mismatches(entry, report.verdicts)
            holds = [c for c in CLASS_NAMES if report.verdicts[c]]
            results[name] = not wrong
            print_status(name, not wrong, f"mismatch: {', '.join(wrong)}" if wrong else f"{len(holds)} class(es) hold")
        except Exception as e:
            results[name] = False
            print_status(name, False, str(e))

    # ---- BOUNDARY HOMS ----
    print("\n📐 BOUNDARY HOMS\n----------------")
    for name in names():
        C = builtin(name).category
        ok = True
        for x in C.objects:
            for y in C.objects:
                for bound in C.degrees():
                    classes = len(boundary_hom(C, x, y, bound))
                    components = sum(len(factorization_components(C, f, bound).components) for f in C.hom(x, y))
                    ok = ok and classes == components
        results[f"boundary {name}"] = ok
        print_status(name, ok)

    # ---- INITIAL / FINAL ----
    print("\n🔁 GRAPH CRITERION\n------------------")
    for name in names():
        C = builtin(name).category
        if not check_almost_reedy(C).ok:
            continue
        both = all(r.initial and r.final for r in (check_initial_final(C, x) for x in C.objects))
        ok = both == builtin(name).expected.get("reedy", both)
        results[f"graph {name}"] = ok
        print_status(name, ok, "initial and final everywhere" if both else "fails somewhere")

    # ---- FS REDUCTION ----
    print("\n🪞 FS REDUCTION\n--------------")
    try:
        red = fs_reduce(builtin("iso_pair").category, iso_pair_fs_structure())
        ok = red.objects == ("0",) and red.canonical_check.ok
        results["fs iso_pair"] = ok
        print_status("iso_pair", ok, f"kept {', '.join(red.objects)}")
    except Exception as e:
        results["fs iso_pair"] = False
        print_status("iso_pair", False, str(e))

    try:
        up, down = rezk_enlarged_classes()
        C = builtin("rezk_poset").category
        red = fs_reduce(C, canonical_functorial_factorization(C, up, down))
        ok = not red.supplied_check.ok and red.canonical_check.ok
        results["fs rezk_poset"] = ok
        print_status("rezk_poset", ok, f"enlarged classes: {red.supplied_check.witness}")
    except Exception as e:
        results["fs rezk_poset"] = False
        print_status("rezk_poset", False, str(e))

    # ---- SUMMARY ----
    passed = [k for k, v in results.items() if v]
    failed = [k for k, v in results.items() if not v]
    print("\n✅ TOTAL PASSED:", len(passed))
    print("❌ TOTAL FAILED:", len(failed))
    print("==========================\n")
    return 0 if not failed else 1


if __name__ == "__main__":
    sys.exit(main())
