/* tslint:disable */
/* eslint-disable */

/**
 * Hybrid variance scan as flat rows of `[state, L_A, variance, se, bound]`,
 * with state 0 = random product, 1 = Haar, 2 = GHZ.
 */
export function hybridVarianceScan(num_qubits: number, snapshots: number, seed: number): Float64Array;

/**
 * Trace-norm change of the reconstructed qubit after adding a harmonic to
 * its axis distribution.
 */
export function perturbAxisDistribution(x: number, y: number, z: number, plus: boolean, l: number, m: number, amplitude: number): number;

/**
 * `f(k, L_A, L)` for `k = 1..=L`, one block of `L` values per subsystem size.
 */
export function subsetFactorCurves(num_qubits: number, subsystem_sizes: Uint32Array): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly hybridVarianceScan: (a: number, b: number, c: number) => [number, number, number, number];
    readonly perturbAxisDistribution: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly subsetFactorCurves: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
