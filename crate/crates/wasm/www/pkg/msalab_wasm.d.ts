/* tslint:disable */
/* eslint-disable */

/**
 * Standard ℓ-covering of the centered square of side `big`.
 */
export function covering(big: number, ell: number): string;

/**
 * Eigenpairs below `e0` of a one-dimensional Poisson operator on [−L/2, L/2]
 * with their decay fits.
 */
export function eigenstates(side: number, density: number, e0: number, seed: bigint): string;

/**
 * Marked Poisson sample at 2ϱ on the centered square (d = 2) or interval,
 * split into X and X′ by the marks.
 */
export function sample(dim: number, side: number, density: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly covering: (a: number, b: number) => [number, number, number, number];
    readonly eigenstates: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly sample: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
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
