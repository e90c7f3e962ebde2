"""Command line entrypoints: run scenarios, replay and verify journals."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .api import EngineServer, tokens_from_config
from .engine import replay as replay_journal
from .errors import ChainBroken, DivergenceDetected, EngineError
from .journal import load_journal
from .scenario import load_scenario, run_scenario


def data_dir() -> Path:
    root = Path(os.environ.get("ENGINE_DATA_DIR", "engine-data"))
    root.mkdir(parents=True, exist_ok=True)
    return root


def _parse_fault(raw: str | None) -> dict[int, str]:
    if not raw:
        return {}
    profile, _, index = raw.partition(":")
    return {int(index) if index else 1: profile}


def cmd_run(args) -> int:
    raw = load_scenario(args.scenario)
    fault_profiles = _parse_fault(args.fault)
    try:
        result = run_scenario(raw, replicas=args.replicas, fault_profiles=fault_profiles)
    except DivergenceDetected as exc:
        print(f"DIVERGENCE: replicas {list(exc.replica_ids)} at ledger seq {exc.seq}")
        for diff in exc.diff:
            print(f"  first divergent journal entry for replica {diff['replica_id']}: seq {diff['seq']}")
        return 2
    for line in result.report_lines():
        print(line)
    journal_path = data_dir() / f"{result.name}.journal.jsonl"
    result.engine.journal.dump(journal_path)
    print(f"journal: {journal_path} ({len(result.engine.journal)} entries, "
          f"digest {result.engine.digest[:16]}...)")
    if args.serve:
        host, _, port = args.serve.partition(":")
        server = EngineServer(result.engine, tokens_from_config(raw["config"]),
                              host=host or "127.0.0.1", port=int(port or 0))
        server.start()
        print(f"serving API on {server.address}")
        try:
            server.thread.join()
        except KeyboardInterrupt:
            server.shutdown()
    return 0 if result.passed else 1


def cmd_replay(args) -> int:
    journal = load_journal(args.journal)
    try:
        engine = replay_journal(journal)
    except ChainBroken as exc:
        print(f"CHAIN BROKEN at seq {exc.seq}")
        return 1
    print(f"replay OK: {len(engine.journal)} entries, digest {engine.digest}")
    state = engine.state_view()
    print(f"mode={state['mode']} last_step={state['last_step_date']} "
          f"instances={list(state['instances'])}")
    return 0


def cmd_verify(args) -> int:
    journal = load_journal(args.journal)
    try:
        journal.verify_chain()
    except ChainBroken as exc:
        print(f"CHAIN BROKEN at seq {exc.seq}")
        return 1
    print(f"chain OK: {len(journal)} entries, head digest {journal.head_digest}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="engine", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run a scenario file")
    run_parser.add_argument("--scenario", required=True)
    run_parser.add_argument("--replicas", type=int, default=1)
    run_parser.add_argument("--fault", help="fault profile, e.g. perturb-rounding:1")
    run_parser.add_argument("--serve", help="serve the API afterwards, host:port")
    run_parser.set_defaults(func=cmd_run)

    replay_parser = sub.add_parser("replay", help="rebuild state from a journal file")
    replay_parser.add_argument("--journal", required=True)
    replay_parser.set_defaults(func=cmd_replay)

    verify_parser = sub.add_parser("verify", help="verify a journal's digest chain")
    verify_parser.add_argument("--journal", required=True)
    verify_parser.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
