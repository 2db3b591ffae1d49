/**
 * TypeScript bindings for the mipgym environments.
 *
 * Each {@link Session} owns one `python3 -m mipgym.server` subprocess and
 * talks to it over JSON lines.  Environments follow the same episode shape
 * as the Python API: `reset` returns `[observation, actionSet, reward,
 * done]`, `step` returns `[observation, actionSet, reward, done, info]`.
 * Because every session is a separate OS process, episodes driven from
 * different sessions genuinely run in parallel.
 *
 * ```ts
 * const env = await Branching.create({
 *   observation: "node_bipartite",
 *   reward: "-nnodes",
 * });
 * const gen = await env.session.generator("combinatorial_auction", { tier: "desk" });
 * const instance = await gen.generate(0);
 * let [obs, actionSet, , done] = await env.reset(instance);
 * while (!done) {
 *   const action = (actionSet as BranchCandidates).indices[0]!;
 *   [obs, actionSet, , done] = await env.step(action);
 * }
 * await env.close();
 * ```
 */

import {
  type ArrayPayload,
  type Matrix,
  decodeFloatVector,
  decodeIntVector,
  decodeMatrix,
  decodeNumber,
  matrixRow,
} from "./arrays";
import { MipgymError, ServerProcess } from "./transport";

export { MipgymError };
export { type Matrix, matrixRow } from "./arrays";

// ---------------------------------------------------------------------------
// Episode payload types
// ---------------------------------------------------------------------------

/** Variable/constraint bipartite view of the node LP. */
export interface NodeBipartiteObservation {
  kind: "node_bipartite";
  /** One row per variable, 14 columns. */
  variableFeatures: Matrix;
  /** One row per constraint, 4 columns. */
  constraintFeatures: Matrix;
  /** Constraint index of each nonzero, aligned with edgeCol/edgeValue. */
  edgeRow: number[];
  edgeCol: number[];
  edgeValue: Float64Array;
}

/** Per-candidate feature rows for the current branching decision. */
export interface CandidateFeaturesObservation {
  kind: "candidate_features";
  /** One row per branch candidate, 18 columns. */
  features: Matrix;
  /** Variable index of each row. */
  candidateIndices: number[];
}

export type Observation =
  | NodeBipartiteObservation
  | CandidateFeaturesObservation
  | null;

/** Fractional integer variables available for branching. */
export interface BranchCandidates {
  kind: "branch_candidates";
  indices: number[];
  fractionality: Float64Array;
}

/** One-shot configuration space: names and allowed values per parameter. */
export interface ParameterSpaceDescriptor {
  kind: "parameter_space";
  names: string[];
  domains: Record<string, unknown>;
}

export type ActionSet = BranchCandidates | ParameterSpaceDescriptor | null;

/** Branching takes a variable index, Configuring a parameter map,
 * DefaultSolve `null`. */
export type Action = number | Record<string, string | number> | null;

/** Solver counters reported by `step`; keys mirror the Python `info` dict. */
export interface StepInfo {
  nodes_processed: number;
  lp_iterations_total: number;
  wall_time: number;
  primal_bound: number;
  dual_bound: number;
  status: string;
}

export type ResetResult = [Observation, ActionSet, number, boolean];
export type StepResult = [Observation, ActionSet, number, boolean, StepInfo];

/** Remote problem instance, generated or read within one session. */
export interface InstanceHandle {
  handle: number;
  name: string;
  sense: string;
  nVars: number;
  nConstraints: number;
  metadata: Record<string, unknown>;
}

// ---------------------------------------------------------------------------
// Wire decoding
// ---------------------------------------------------------------------------

interface RawResetResult {
  observation: unknown;
  action_set: unknown;
  reward: number | string;
  done: boolean;
}

interface RawStepResult extends RawResetResult {
  info: Record<string, unknown>;
}

interface RawInstance {
  instance: number;
  name: string;
  sense: string;
  n_vars: number;
  n_constraints: number;
  metadata: Record<string, unknown>;
}

function decodeObservation(raw: unknown): Observation {
  if (raw === null || raw === undefined) return null;
  const obs = raw as Record<string, unknown>;
  if (obs.kind === "node_bipartite") {
    return {
      kind: "node_bipartite",
      variableFeatures: decodeMatrix(obs.variable_features as ArrayPayload),
      constraintFeatures: decodeMatrix(obs.constraint_features as ArrayPayload),
      edgeRow: decodeIntVector(obs.edge_row as ArrayPayload),
      edgeCol: decodeIntVector(obs.edge_col as ArrayPayload),
      edgeValue: decodeFloatVector(obs.edge_value as ArrayPayload),
    };
  }
  if (obs.kind === "candidate_features") {
    return {
      kind: "candidate_features",
      features: decodeMatrix(obs.features as ArrayPayload),
      candidateIndices: decodeIntVector(obs.candidate_indices as ArrayPayload),
    };
  }
  throw new TypeError(`unknown observation kind ${JSON.stringify(obs.kind)}`);
}

function decodeActionSet(raw: unknown): ActionSet {
  if (raw === null || raw === undefined) return null;
  const set = raw as Record<string, unknown>;
  if (set.kind === "branch_candidates") {
    return {
      kind: "branch_candidates",
      indices: decodeIntVector(set.indices as ArrayPayload),
      fractionality: decodeFloatVector(set.fractionality as ArrayPayload),
    };
  }
  if (set.kind === "parameter_space") {
    return {
      kind: "parameter_space",
      names: set.names as string[],
      domains: set.domains as Record<string, unknown>,
    };
  }
  throw new TypeError(`unknown action set kind ${JSON.stringify(set.kind)}`);
}

function decodeInfo(raw: Record<string, unknown>): StepInfo {
  return {
    nodes_processed: raw.nodes_processed as number,
    lp_iterations_total: raw.lp_iterations_total as number,
    wall_time: decodeNumber(raw.wall_time as number | string),
    primal_bound: decodeNumber(raw.primal_bound as number | string),
    dual_bound: decodeNumber(raw.dual_bound as number | string),
    status: raw.status as string,
  };
}

function decodeInstance(raw: RawInstance): InstanceHandle {
  return {
    handle: raw.instance,
    name: raw.name,
    sense: raw.sense,
    nVars: raw.n_vars,
    nConstraints: raw.n_constraints,
    metadata: raw.metadata,
  };
}

// ---------------------------------------------------------------------------
// Session
// ---------------------------------------------------------------------------

export interface SessionOptions {
  /** Python executable to launch; defaults to $MIPGYM_PYTHON, then "python3". */
  python?: string;
}

export interface GeneratorOptions {
  tier?: string;
  seed?: number;
  params?: Record<string, number | string>;
}

/** One server subprocess plus the handles opened against it. */
export class Session {
  private constructor(private readonly server: ServerProcess) {}

  static start(options: SessionOptions = {}): Session {
    return new Session(ServerProcess.spawn(options.python));
  }

  /** Send one raw request; mainly for the environment/generator classes. */
  rpc<T = unknown>(op: string, payload: Record<string, unknown> = {}): Promise<T> {
    return this.server.request(op, payload) as Promise<T>;
  }

  async generator(
    family: string,
    options: GeneratorOptions = {},
  ): Promise<Generator> {
    const payload: Record<string, unknown> = { family };
    if (options.tier !== undefined) payload.tier = options.tier;
    if (options.seed !== undefined) payload.seed = options.seed;
    if (options.params !== undefined) payload.params = options.params;
    const result = await this.rpc<{ generator: number }>(
      "make_generator",
      payload,
    );
    return new Generator(this, result.generator);
  }

  async readProblem(path: string): Promise<InstanceHandle> {
    return decodeInstance(await this.rpc<RawInstance>("read_problem", { path }));
  }

  async writeProblem(instance: InstanceHandle, path: string): Promise<void> {
    await this.rpc("write_problem", { instance: instance.handle, path });
  }

  async close(): Promise<void> {
    await this.server.close();
  }
}

/** Remote instance generator; `generate(i)` is pure in `i`. */
export class Generator {
  constructor(
    readonly session: Session,
    private readonly handle: number,
  ) {}

  async generate(index = 0): Promise<InstanceHandle> {
    const raw = await this.session.rpc<RawInstance>("generate", {
      generator: this.handle,
      index,
    });
    return decodeInstance(raw);
  }
}

// ---------------------------------------------------------------------------
// Environments
// ---------------------------------------------------------------------------

export interface EnvironmentOptions {
  /** "node_bipartite", "candidate_features", or "none" (default). */
  observation?: string;
  /** Reward expression, e.g. "-nnodes" or "lpiterations + 0.5*solvingtime". */
  reward?: string;
  /** Reference objective for the "boundintegral" reward term. */
  optRef?: number;
  /** Solver parameters fixed for every episode of this environment. */
  params?: Record<string, string | number>;
  /** Attach to an existing session instead of spawning a private one. */
  session?: Session;
  /** Python executable override when spawning a private session. */
  python?: string;
}

async function bindEnvironment(
  task: string,
  options: EnvironmentOptions,
): Promise<[Session, number, boolean]> {
  const owns = options.session === undefined;
  const session = options.session ?? Session.start({ python: options.python });
  const payload: Record<string, unknown> = {
    task,
    observation: options.observation ?? "none",
  };
  if (options.reward !== undefined) payload.reward = options.reward;
  if (options.optRef !== undefined) payload.opt_ref = options.optRef;
  if (options.params !== undefined) payload.params = options.params;
  try {
    const result = await session.rpc<{ env: number }>("make_env", payload);
    return [session, result.env, owns];
  } catch (err) {
    if (owns) await session.close();
    throw err;
  }
}

/** An environment handle bound to one session. */
export abstract class BoundEnvironment {
  private closed = false;

  protected constructor(
    readonly session: Session,
    private readonly handle: number,
    private readonly ownsSession: boolean,
  ) {}

  private guard(): void {
    if (this.closed) {
      throw new MipgymError("ClosedHandleError", "environment is closed");
    }
  }

  /** Fix the seed consumed by the next `reset`. */
  async seed(value: number): Promise<void> {
    this.guard();
    await this.session.rpc("env_seed", { env: this.handle, value });
  }

  async reset(instance: InstanceHandle | string): Promise<ResetResult> {
    this.guard();
    const spec =
      typeof instance === "string"
        ? { path: instance }
        : { handle: instance.handle };
    const raw = await this.session.rpc<RawResetResult>("env_reset", {
      env: this.handle,
      instance: spec,
    });
    return [
      decodeObservation(raw.observation),
      decodeActionSet(raw.action_set),
      decodeNumber(raw.reward),
      raw.done,
    ];
  }

  async step(action: Action = null): Promise<StepResult> {
    this.guard();
    const raw = await this.session.rpc<RawStepResult>("env_step", {
      env: this.handle,
      action,
    });
    return [
      decodeObservation(raw.observation),
      decodeActionSet(raw.action_set),
      decodeNumber(raw.reward),
      raw.done,
      decodeInfo(raw.info),
    ];
  }

  /** Release the handle; also shuts down the session if this env owns it. */
  async close(): Promise<void> {
    if (this.closed) return;
    this.closed = true;
    try {
      await this.session.rpc("env_close", { env: this.handle });
    } catch {
      // A dead session already released everything.
    }
    if (this.ownsSession) await this.session.close();
  }
}

/** Yields every branching decision; actions are variable indices. */
export class Branching extends BoundEnvironment {
  static async create(options: EnvironmentOptions = {}): Promise<Branching> {
    const [session, handle, owns] = await bindEnvironment("Branching", options);
    return new Branching(session, handle, owns);
  }
}

/** One decision per episode: choose solver parameters, then solve. */
export class Configuring extends BoundEnvironment {
  static async create(options: EnvironmentOptions = {}): Promise<Configuring> {
    const [session, handle, owns] = await bindEnvironment(
      "Configuring",
      options,
    );
    return new Configuring(session, handle, owns);
  }
}

/** No decisions: `step(null)` runs the solver to completion. */
export class DefaultSolve extends BoundEnvironment {
  static async create(options: EnvironmentOptions = {}): Promise<DefaultSolve> {
    const [session, handle, owns] = await bindEnvironment(
      "DefaultSolve",
      options,
    );
    return new DefaultSolve(session, handle, owns);
  }
}
