#!/usr/bin/env python3
import argparse
import logging
import os
import random
import sys
from typing import Callable, Dict, List, Optional

from modules.classify import CLASS_NAMES, classify, fs_reduce, functorial_factorization, canonical_functorial_factorization, reedy_factor
from modules.config_loader import load_config
from modules.corpus import builtin, mismatches, names, random_diagram_map
from modules.diagrams import collage, latching_object, matching_object, recognize_collage
from modules.errors import InvalidCategory, NotACollage, ReedyError, SizeGuardExceeded
from modules.factorization import basic_classes, boundary_hom, enumerate_reedy_factorizations
from modules.formats import (
    dump_bigluing,
    dump_category,
    dump_diagram_map,
    dump_factorization,
    dumps,
    load_bigluing,
    load_category_file,
    load_diagram,
    load_diagram_map,
    load_fs_structure,
    load_lift_problem,
    read_json,
)
from modules.wfs import all_fillers, creedy_classify_map, reedy_classify_map, reedy_factorize_map, solve_lifting

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_INVALID = 2
EXIT_GUARD = 3


def _positive(value: str) -> int:
    n = int(value)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reedy", description="Reedy-category toolkit for finite categories")
    parser.add_argument("--json", action="store_true", help="emit canonical JSON instead of a summary")
    parser.add_argument("--max-search", type=_positive, help="cap on candidate extensions per search")
    parser.add_argument("--seed", type=int, help="seed for random generators")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--config", default="reedy.json", help="optional JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a category file")
    p.add_argument("category")

    p = sub.add_parser("classify", help="decide every Reedy-type class")
    p.add_argument("category")
    p.add_argument("--class", dest="queried", default="reedy", choices=CLASS_NAMES,
                   help="class deciding the exit status")

    p = sub.add_parser("factor", help="factor a morphism as up after down")
    p.add_argument("category")
    p.add_argument("--morphism", required=True)
    p.add_argument("--mode", choices=["s", "c"], default="s")
    p.add_argument("--all", action="store_true", help="list every Reedy factorization")

    p = sub.add_parser("boundary", help="boundary hom classes between two objects")
    p.add_argument("category")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--bound", type=int, help="defaults to the smaller endpoint degree")

    for name in ("matching", "latching"):
        p = sub.add_parser(name, help=f"{name} object of a diagram at an object")
        p.add_argument("diagram")
        p.add_argument("--object", required=True)

    p = sub.add_parser("collage", help="build the collage of abstract bigluing data")
    p.add_argument("bigluing")

    p = sub.add_parser("recognize", help="split a category into bigluing data")
    p.add_argument("category")
    p.add_argument("--split", type=int, required=True, help="objects below this degree form the base")

    p = sub.add_parser("wfs-classify", help="classify a diagram map in the induced structure")
    p.add_argument("map")
    p.add_argument("--structure", choices=["reedy", "c-reedy"], default="reedy")

    p = sub.add_parser("wfs-factor", help="factor a diagram map as L then R")
    p.add_argument("map")

    p = sub.add_parser("lift", help="solve a lifting problem")
    p.add_argument("problem")
    p.add_argument("--all", action="store_true", help="list every filler")

    p = sub.add_parser("fs-reduce", help="reduce a functorial-factorization structure to a Reedy subcategory")
    p.add_argument("category")
    p.add_argument("structure")

    p = sub.add_parser("corpus", help="builtin examples")
    csub = p.add_subparsers(dest="action", required=True)
    csub.add_parser("list")
    e = csub.add_parser("emit")
    e.add_argument("name")
    csub.add_parser("check")
    r = csub.add_parser("random-map", help="seeded random diagram map over an entry")
    r.add_argument("name")
    return parser


class ReedyApp:
    def __init__(self, argv: Optional[List[str]] = None):
        self.args = build_parser().parse_args(argv)
        self.config = load_config(self.args.config)
        level = self.args.log_level or str(self.config.get("LOG_LEVEL", "INFO")).upper()
        logging.getLogger().setLevel(level)
        self.max_search = self.args.max_search or int(self.config["MAX_SEARCH"])
        self.seed = self.args.seed if self.args.seed is not None else int(self.config["SEED"])
        self.set_size = int(self.config["RANDOM_SET_SIZE"])
        self.handlers: Dict[str, Callable[[], int]] = {
            "validate": self.cmd_validate,
            "classify": self.cmd_classify,
            "factor": self.cmd_factor,
            "boundary": self.cmd_boundary,
            "matching": self.cmd_matching,
            "latching": self.cmd_latching,
            "collage": self.cmd_collage,
            "recognize": self.cmd_recognize,
            "wfs-classify": self.cmd_wfs_classify,
            "wfs-factor": self.cmd_wfs_factor,
            "lift": self.cmd_lift,
            "fs-reduce": self.cmd_fs_reduce,
            "corpus": self.cmd_corpus,
        }

    # ---- output ----
    def emit(self, payload, summary: str) -> None:
        sys.stdout.write(dumps(payload) if self.args.json else summary.rstrip("\n") + "\n")

    def run(self) -> int:
        try:
            return self.handlers[self.args.command]()
        except SizeGuardExceeded as e:
            logger.error(str(e))
            return EXIT_GUARD
        except InvalidCategory as e:
            for v in e.violations:
                logger.error(f"{v.kind.value}: {v.detail} {list(v.witness)}")
            return EXIT_INVALID
        except ReedyError as e:
            logger.error(f"{type(e).__name__}: {e}")
            return EXIT_INVALID
        except Exception as e:
            logger.error(f"Unexpected failure in {self.args.command}: {e}", exc_info=True)
            return EXIT_INVALID

    # ---- categories ----
    def cmd_validate(self) -> int:
        C = load_category_file(self.args.category)
        self.emit(dump_category(C), f"valid: {len(C.objects)} objects, {len(C.morphisms)} morphisms, "
                                    f"degrees {list(C.degrees())}")
        return EXIT_OK

    def cmd_classify(self) -> int:
        C = load_category_file(self.args.category)
        report = classify(C, self.max_search)
        lines = []
        for name in CLASS_NAMES:
            mark = "yes" if report.verdicts[name] else "no"
            why = f"  ({report.witnesses[name]})" if name in report.witnesses else ""
            lines.append(f"{name:<18} {mark}{why}")
        self.emit(report.to_json(), "\n".join(lines))
        return EXIT_OK if report.verdicts[self.args.queried] else EXIT_FALSE

    def cmd_factor(self) -> int:
        C = load_category_file(self.args.category)
        f = self.args.morphism
        if self.args.all:
            classes = basic_classes(C)
            facs = enumerate_reedy_factorizations(C, f, classes.up, classes.down)
            self.emit([dump_factorization(p) for p in facs],
                      "\n".join(f"{f} = {p.second} ∘ {p.first}  (through {p.mid})" for p in facs) or f"{f}: none")
            return EXIT_OK if facs else EXIT_FALSE
        p = reedy_factor(C, f, mode=self.args.mode, max_search=self.max_search)
        self.emit(dump_factorization(p), f"{f} = {p.second} ∘ {p.first}  (through {p.mid})")
        return EXIT_OK

    def cmd_boundary(self) -> int:
        C = load_category_file(self.args.category)
        x, y = self.args.source, self.args.target
        C.base.check_object(x)
        C.base.check_object(y)
        bound = self.args.bound if self.args.bound is not None else min(C.deg(x), C.deg(y))
        B = boundary_hom(C, x, y, bound)
        payload = {"source": x, "target": y, "bound": bound,
                   "classes": [{"pairs": [list(p) for p in cls], "composite": h} for cls, h in zip(B.classes, B.to_hom)]}
        lines = [f"∂ below degree {bound} from {x} to {y}: {len(B)} class(es)"]
        lines += [f"  {h} <- {', '.join(f'{q}∘{p}' for p, q in cls)}" for cls, h in zip(B.classes, B.to_hom)]
        self.emit(payload, "\n".join(lines))
        return EXIT_OK

    # ---- diagrams ----
    def _diagram(self):
        data = read_json(self.args.diagram)
        return load_diagram(data, os.path.dirname(os.path.abspath(self.args.diagram)))

    def cmd_matching(self) -> int:
        C, X = self._diagram()
        M = matching_object(C, self.args.object, X, self.max_search)
        payload = {"object": M.obj, "index": list(M.index),
                   "elements": [{"token": t, "family": dict(M.families[t])} for t in M.elements]}
        self.emit(payload, f"M_{M.obj}: {len(M)} element(s) over {len(M.index)} morphism(s)\n"
                  + "\n".join(f"  {t}" for t in M.elements))
        return EXIT_OK

    def cmd_latching(self) -> int:
        C, X = self._diagram()
        L = latching_object(C, self.args.object, X)
        payload = {"object": L.obj, "index": list(L.index),
                   "elements": [{"token": t, "members": [list(m) for m in L.classes[t]]} for t in L.elements]}
        self.emit(payload, f"L_{L.obj}: {len(L)} element(s) over {len(L.index)} morphism(s)\n"
                  + "\n".join(f"  {t}" for t in L.elements))
        return EXIT_OK

    def cmd_collage(self) -> int:
        abd = load_bigluing(read_json(self.args.bigluing))
        E = collage(abd)
        self.emit(dump_category(E), f"collage: {len(E.objects)} objects, {len(E.morphisms)} morphisms")
        return EXIT_OK

    def cmd_recognize(self) -> int:
        C = load_category_file(self.args.category)
        try:
            abd = recognize_collage(C, self.args.split)
        except NotACollage as e:
            self.emit({"collage": False, "reason": str(e), "witness": list(e.witness)},
                      f"not a collage at degree {self.args.split}: {e}")
            return EXIT_FALSE
        self.emit(dump_bigluing(abd), f"collage of {len(abd.C.objects)} base and {len(abd.D.objects)} new object(s); "
                                      f"U has {len(abd.U.all_elements())}, W has {len(abd.W.all_elements())} element(s)")
        return EXIT_OK

    # ---- weak factorization structures ----
    def _map(self):
        data = read_json(self.args.map)
        return load_diagram_map(data, os.path.dirname(os.path.abspath(self.args.map)))

    def cmd_wfs_classify(self) -> int:
        C, m = self._map()
        if self.args.structure == "reedy":
            result = reedy_classify_map(C, m, self.max_search)
        else:
            result = creedy_classify_map(C, m, self.max_search)
        payload = {
            "is_L": result.is_L,
            "is_R": result.is_R,
            "matching": {x: {"injective": r.is_injective(), "surjective": r.is_surjective()} for x, r in result.matching.items()},
            "latching": {x: {"injective": l.is_injective(), "surjective": l.is_surjective()} for x, l in result.latching.items()},
        }
        self.emit(payload, f"L: {'yes' if result.is_L else 'no'}\nR: {'yes' if result.is_R else 'no'}")
        return EXIT_OK

    def cmd_wfs_factor(self) -> int:
        C, m = self._map()
        left, right = reedy_factorize_map(C, m, self.max_search)
        self.emit({"left": dump_diagram_map(left), "right": dump_diagram_map(right)},
                  f"factored through a diagram of {left.target.size()} element(s); left is L, right is R")
        return EXIT_OK

    def cmd_lift(self) -> int:
        data = read_json(self.args.problem)
        _, problem = load_lift_problem(data, os.path.dirname(os.path.abspath(self.args.problem)))
        fillers = all_fillers(problem, self.max_search) if self.args.all else [f for f in [solve_lifting(problem, self.max_search)] if f]
        payload = {"fillers": [{x: dict(d.components[x]) for x in d.shape.objects} for d in fillers]}
        if not fillers:
            self.emit(payload, "no filler")
            return EXIT_FALSE
        self.emit(payload, f"{len(fillers)} filler(s); first: "
                  + ", ".join(f"{x}:{dict(fillers[0].components[x])}" for x in fillers[0].shape.objects))
        return EXIT_OK

    def cmd_fs_reduce(self) -> int:
        C = load_category_file(self.args.category)
        up, down, split = load_fs_structure(read_json(self.args.structure), C)
        if split:
            ff = functorial_factorization(C, split, up, down, self.max_search)
        else:
            ff = canonical_functorial_factorization(C, up, down)
        red = fs_reduce(C, ff)
        payload = {
            "objects": list(red.objects),
            "replacements": {x: {"target": r.target, "forward": r.forward, "backward": r.backward}
                             for x, r in red.replacements.items()},
            "reedy_with_supplied_classes": red.supplied_check.ok,
            "reedy_with_basic_classes": red.canonical_check.ok,
        }
        lines = [f"kept objects: {', '.join(red.objects)}"]
        lines += [f"  {x} ≅ {r.target} via {r.forward} / {r.backward}" for x, r in red.replacements.items()]
        lines.append(f"Reedy with supplied classes: {'yes' if red.supplied_check.ok else 'no'}")
        lines.append(f"Reedy with basic classes: {'yes' if red.canonical_check.ok else 'no'}")
        self.emit(payload, "\n".join(lines))
        return EXIT_OK if red.canonical_check.ok else EXIT_FALSE

    # ---- corpus ----
    def cmd_corpus(self) -> int:
        action = self.args.action
        if action == "list":
            self.emit(names(), "\n".join(f"{n:<22} {builtin(n).provenance}" for n in names()))
            return EXIT_OK
        if action == "emit":
            entry = builtin(self.args.name)
            sys.stdout.write(dumps(dump_category(entry.category)))
            return EXIT_OK
        if action == "random-map":
            entry = builtin(self.args.name)
            m = random_diagram_map(entry.category.base, random.Random(self.seed), self.set_size)
            payload = {"shape": dump_category(entry.category)}
            payload.update(dump_diagram_map(m))
            sys.stdout.write(dumps(payload))
            return EXIT_OK
        failures = {}
        for n in names():
            entry = builtin(n)
            wrong = mismatches(entry, classify(entry.category, self.max_search).verdicts)
            if wrong:
                failures[n] = wrong
        self.emit({"mismatches": failures},
                  "\n".join(f"{n:<22} {'MISMATCH ' + ', '.join(failures[n]) if n in failures else 'ok'}" for n in names()))
        return EXIT_FALSE if failures else EXIT_OK


if __name__ == "__main__":
    app = ReedyApp()
    sys.exit(app.run())
