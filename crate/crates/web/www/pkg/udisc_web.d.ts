/* tslint:disable */
/* eslint-disable */

/**
 * Two qutrit states sharing weight `w` on `|2>`:
 * `ρ_1 = (1-w)|0><0| + w|2><2|` and `ρ_2 = (1-w)|b><b| + w|2><2|` with
 * `b = cos θ|0> + sin θ|1>`. Returns a JSON summary.
 */
export function mixed_split(theta: number, w: number): string;

/**
 * Samples `points` overlaps evenly in `[0, 1]` and returns
 * `[s, P, bound]` triples, flattened.
 */
export function pure_pair_curve(eta1: number, points: number): Float64Array;

/**
 * Synthesizes the optimal measurement for a pure pair and replays it.
 */
export function simulate_pair(eta1: number, overlap: number, trials: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly mixed_split: (a: number, b: number) => [number, number, number, number];
    readonly pure_pair_curve: (a: number, b: number) => [number, number, number, number];
    readonly simulate_pair: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
