import { execFileSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import * as path from "node:path";
import { performance } from "node:perf_hooks";
import { fileURLToPath } from "node:url";

import { describe, expect, test } from "vitest";

import {
  type ActionSet,
  type BranchCandidates,
  type CandidateFeaturesObservation,
  type InstanceHandle,
  type NodeBipartiteObservation,
  Branching,
  Configuring,
  DefaultSolve,
  MipgymError,
  Session,
} from "../src/index";

const PYTHON = process.env.MIPGYM_PYTHON ?? "python3";
const FIXTURES = path.join(
  path.dirname(fileURLToPath(import.meta.url)),
  "fixtures",
);

function branchCandidates(set: ActionSet): BranchCandidates {
  if (!set || set.kind !== "branch_candidates") {
    throw new Error(`expected branch candidates, got ${JSON.stringify(set)}`);
  }
  return set;
}

async function expectMipgymError(
  promise: Promise<unknown>,
  type: string,
): Promise<void> {
  let caught: unknown = null;
  try {
    await promise;
  } catch (err) {
    caught = err;
  }
  expect(caught).toBeInstanceOf(MipgymError);
  expect((caught as MipgymError).type).toBe(type);
}

interface Transcript {
  actions: number[];
  rewards: number[];
  dones: boolean[];
  info: {
    nodes_processed: number;
    lp_iterations_total: number;
    status: string;
    primal_bound: number;
  };
}

/** Run the same episode natively in Python and return its transcript. */
function nativeTranscript(): Transcript {
  const script = `
import json
from mipgym.cli import parse_reward_expr
from mipgym.env import make_env
from mipgym.generators import preset

instance = preset("combinatorial_auction", "desk").build().generate(1)
env = make_env("Branching", reward_function=parse_reward_expr("-nnodes")())
env.seed(7)
obs, action_set, reward, done = env.reset(instance)
actions, rewards, dones = [], [float(reward)], [bool(done)]
info = None
while not done:
    action = int(action_set.indices[0])
    actions.append(action)
    obs, action_set, reward, done, info = env.step(action)
    rewards.append(float(reward))
    dones.append(bool(done))
print(json.dumps({
    "actions": actions,
    "rewards": rewards,
    "dones": dones,
    "info": {
        "nodes_processed": info["nodes_processed"],
        "lp_iterations_total": info["lp_iterations_total"],
        "status": info["status"],
        "primal_bound": info["primal_bound"],
    },
}))
`;
  const out = execFileSync(PYTHON, ["-c", script], { encoding: "utf8" });
  return JSON.parse(out) as Transcript;
}

describe("episode fidelity", () => {
  test("replayed auction episode matches the native transcript exactly", async () => {
    const native = nativeTranscript();
    const env = await Branching.create({ reward: "-nnodes" });
    try {
      const gen = await env.session.generator("combinatorial_auction", {
        tier: "desk",
      });
      const instance = await gen.generate(1);
      await env.seed(7);

      let [, actionSet, reward, done] = await env.reset(instance);
      const actions: number[] = [];
      const rewards = [reward];
      const dones = [done];
      let lastInfo = null as Transcript["info"] | null;
      while (!done) {
        const action = branchCandidates(actionSet).indices[0]!;
        actions.push(action);
        const [, nextSet, stepReward, stepDone, info] = await env.step(action);
        actionSet = nextSet;
        reward = stepReward;
        done = stepDone;
        rewards.push(stepReward);
        dones.push(stepDone);
        lastInfo = info;
      }

      expect(actions).toEqual(native.actions);
      expect(rewards).toEqual(native.rewards);
      expect(dones).toEqual(native.dones);
      expect(lastInfo).not.toBeNull();
      expect(lastInfo!.nodes_processed).toBe(native.info.nodes_processed);
      expect(lastInfo!.lp_iterations_total).toBe(
        native.info.lp_iterations_total,
      );
      expect(lastInfo!.status).toBe(native.info.status);
      expect(lastInfo!.primal_bound).toBe(native.info.primal_bound);
      // The reward stream telescopes to the tree size.
      expect(rewards.reduce((a, b) => a + b, 0)).toBe(
        -lastInfo!.nodes_processed,
      );
    } finally {
      await env.close();
    }
  });

  test("seeded episodes replay identically through the bindings", async () => {
    const env = await Branching.create({ reward: "nnodes" });
    try {
      const gen = await env.session.generator("combinatorial_auction", {
        tier: "desk",
      });
      const instance = await gen.generate(3);

      const runOnce = async (): Promise<number[]> => {
        await env.seed(11);
        let [, actionSet, reward, done] = await env.reset(instance);
        const rewards = [reward];
        while (!done) {
          const action = branchCandidates(actionSet).indices[0]!;
          [, actionSet, reward, done] = await env.step(action);
          rewards.push(reward);
        }
        return rewards;
      };

      const first = await runOnce();
      const second = await runOnce();
      expect(second).toEqual(first);
      expect(first.length).toBeGreaterThan(1);
    } finally {
      await env.close();
    }
  });
});

describe("observation layouts", () => {
  test("node bipartite arrays have the documented shapes", async () => {
    const env = await Branching.create({ observation: "node_bipartite" });
    try {
      const gen = await env.session.generator("combinatorial_auction", {
        tier: "desk",
      });
      const instance = await gen.generate(1);
      const [obs, actionSet, , done] = await env.reset(instance);
      expect(done).toBe(false);

      const bipartite = obs as NodeBipartiteObservation;
      expect(bipartite.kind).toBe("node_bipartite");
      expect(bipartite.variableFeatures.rows).toBe(instance.nVars);
      expect(bipartite.variableFeatures.cols).toBe(14);
      expect(bipartite.constraintFeatures.rows).toBe(instance.nConstraints);
      expect(bipartite.constraintFeatures.cols).toBe(4);

      const nnz = bipartite.edgeValue.length;
      expect(nnz).toBeGreaterThan(0);
      expect(bipartite.edgeRow.length).toBe(nnz);
      expect(bipartite.edgeCol.length).toBe(nnz);
      for (const r of bipartite.edgeRow) {
        expect(r).toBeGreaterThanOrEqual(0);
        expect(r).toBeLessThan(instance.nConstraints);
      }
      for (const c of bipartite.edgeCol) {
        expect(c).toBeGreaterThanOrEqual(0);
        expect(c).toBeLessThan(instance.nVars);
      }

      const candidates = branchCandidates(actionSet);
      expect(candidates.indices.length).toBeGreaterThan(0);
      expect(candidates.fractionality.length).toBe(candidates.indices.length);
    } finally {
      await env.close();
    }
  });

  test("candidate features align with the action set", async () => {
    const env = await Branching.create({ observation: "candidate_features" });
    try {
      const gen = await env.session.generator("combinatorial_auction", {
        tier: "desk",
      });
      const instance = await gen.generate(1);
      const [obs, actionSet, , done] = await env.reset(instance);
      expect(done).toBe(false);

      const features = obs as CandidateFeaturesObservation;
      const candidates = branchCandidates(actionSet);
      expect(features.kind).toBe("candidate_features");
      expect(features.features.cols).toBe(18);
      expect(features.features.rows).toBe(candidates.indices.length);
      expect(features.candidateIndices).toEqual(candidates.indices);
    } finally {
      await env.close();
    }
  });

  test("a root-integral instance terminates at reset with an empty action set", async () => {
    const env = await Branching.create({ observation: "node_bipartite" });
    try {
      const [obs, actionSet, , done] = await env.reset(
        path.join(FIXTURES, "integral.lp"),
      );
      expect(done).toBe(true);
      expect(obs).toBeNull();
      expect(branchCandidates(actionSet).indices.length).toBe(0);
    } finally {
      await env.close();
    }
  });
});

describe("configuring and error surfacing", () => {
  test("parameter space action descriptor crosses the wire", async () => {
    const env = await Configuring.create();
    try {
      const gen = await env.session.generator("combinatorial_auction", {
        tier: "desk",
      });
      const instance = await gen.generate(0);
      const [obs, actionSet, , done] = await env.reset(instance);
      expect(obs).toBeNull();
      expect(done).toBe(false);
      if (!actionSet || actionSet.kind !== "parameter_space") {
        throw new Error("expected a parameter space");
      }
      expect(actionSet.names).toContain("branching_rule");
      expect(actionSet.domains["node_selection"]).toEqual([
        "best_bound",
        "dfs",
      ]);

      const [, , , stepDone, info] = await env.step({
        branching_rule: "most_infeasible",
        node_selection: "dfs",
      });
      expect(stepDone).toBe(true);
      expect(info.status).toBe("optimal");
      expect(info.nodes_processed).toBeGreaterThanOrEqual(1);
    } finally {
      await env.close();
    }
  });

  test("python exceptions surface as typed errors", async () => {
    const session = Session.start();
    try {
      await expectMipgymError(
        session.readProblem("/nonexistent/missing.lp"),
        "FileNotFoundError",
      );

      const configuring = await Configuring.create({ session });
      const gen = await session.generator("combinatorial_auction", {
        tier: "desk",
      });
      const instance = await gen.generate(0);
      await configuring.reset(instance);
      await expectMipgymError(
        configuring.step({ node_selection: "bogus" }),
        "InvalidActionError",
      );

      const solve = await DefaultSolve.create({ session });
      const [, , , done] = await solve.reset(instance);
      expect(done).toBe(false);
      const [, , , stepDone] = await solve.step(null);
      expect(stepDone).toBe(true);
      await expectMipgymError(solve.step(null), "EnvProtocolError");
    } finally {
      await session.close();
    }
  });

  test("a closed environment refuses further use", async () => {
    const session = Session.start();
    try {
      const env = await Branching.create({ session });
      await env.close();
      await expectMipgymError(env.seed(1), "ClosedHandleError");
      const second = await Branching.create({ session });
      await second.close();
      // Closing twice is a no-op, and the session stays usable.
      await second.close();
      const gen = await session.generator("set_cover", { tier: "desk" });
      const instance = await gen.generate(0);
      expect(instance.nVars).toBeGreaterThan(0);
    } finally {
      await session.close();
    }
  });
});

describe("file round trips", () => {
  test("write then read preserves the instance and its episodes", async () => {
    const session = Session.start();
    const dir = mkdtempSync(path.join(tmpdir(), "mipgym-"));
    try {
      const gen = await session.generator("combinatorial_auction", {
        tier: "desk",
      });
      const original = await gen.generate(2);
      const file = path.join(dir, "roundtrip.lp");
      await session.writeProblem(original, file);

      const reread = await session.readProblem(file);
      expect(reread.name).toBe(original.name);
      expect(reread.sense).toBe(original.sense);
      expect(reread.nVars).toBe(original.nVars);
      expect(reread.nConstraints).toBe(original.nConstraints);

      const env = await DefaultSolve.create({ session, reward: "nnodes" });
      const solveNodes = async (
        instance: InstanceHandle | string,
      ): Promise<number> => {
        let [, , , done] = await env.reset(instance);
        let nodes = -1;
        while (!done) {
          const [, , , stepDone, info] = await env.step(null);
          done = stepDone;
          nodes = info.nodes_processed;
        }
        return nodes;
      };
      const byHandle = await solveNodes(original);
      const byPath = await solveNodes(file);
      expect(byPath).toBe(byHandle);
      expect(byHandle).toBeGreaterThanOrEqual(1);
      await env.close();
    } finally {
      rmSync(dir, { recursive: true, force: true });
      await session.close();
    }
  });
});

describe("parallel sessions", () => {
  interface Interval {
    start: number;
    end: number;
  }

  /** Total time for which both sides have a call in flight.  Each side's
   * intervals are sequential and disjoint, so a two-pointer sweep works. */
  function intersection(xs: Interval[], ys: Interval[]): number {
    let i = 0;
    let j = 0;
    let total = 0;
    while (i < xs.length && j < ys.length) {
      const lo = Math.max(xs[i]!.start, ys[j]!.start);
      const hi = Math.min(xs[i]!.end, ys[j]!.end);
      if (hi > lo) total += hi - lo;
      if (xs[i]!.end < ys[j]!.end) i += 1;
      else j += 1;
    }
    return total;
  }

  function busyTime(xs: Interval[]): number {
    return xs.reduce((acc, x) => acc + (x.end - x.start), 0);
  }

  test("two sessions' engine calls overlap in wall time", async () => {
    const first = await DefaultSolve.create();
    const second = await DefaultSolve.create();
    try {
      const instancesOf = async (env: DefaultSolve) => {
        const gen = await env.session.generator("maximum_independent_set", {
          tier: "desk",
        });
        const handles: InstanceHandle[] = [];
        for (let i = 0; i < 6; i += 1) handles.push(await gen.generate(i));
        return handles;
      };
      const firstInstances = await instancesOf(first);
      const secondInstances = await instancesOf(second);

      const workload = async (
        env: DefaultSolve,
        instances: InstanceHandle[],
        intervals: Interval[],
      ): Promise<void> => {
        for (const instance of instances) {
          let start = performance.now();
          let [, , , done] = await env.reset(instance);
          intervals.push({ start, end: performance.now() });
          while (!done) {
            start = performance.now();
            [, , , done] = await env.step(null);
            intervals.push({ start, end: performance.now() });
          }
        }
      };

      // Warm both processes so one-time costs stay out of the timings.
      await workload(first, firstInstances.slice(0, 1), []);
      await workload(second, secondInstances.slice(0, 1), []);

      const ofFirst: Interval[] = [];
      const ofSecond: Interval[] = [];
      await Promise.all([
        workload(first, firstInstances, ofFirst),
        workload(second, secondInstances, ofSecond),
      ]);

      // Nothing serializes the two environments: while one engine call is
      // in flight the other session's calls proceed, so the in-flight
      // intervals of the two sessions must overlap for most of the busier
      // side's time.  A binding that held a shared lock across engine
      // compute would push this intersection toward zero.
      const overlap = intersection(ofFirst, ofSecond);
      const shorter = Math.min(busyTime(ofFirst), busyTime(ofSecond));
      expect(shorter).toBeGreaterThan(0);
      expect(overlap).toBeGreaterThan(0.5 * shorter);
    } finally {
      await first.close();
      await second.close();
    }
  });
});
