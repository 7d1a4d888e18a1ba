/* tslint:disable */
/* eslint-disable */

/**
 * Real parts of the constant-state spectrum `σ(−iξA(ε) − ξ²D)` on `[0, xi_max]`.
 */
export function dispersion_curves(document: string, eps: number, xi_max: number, points: number): string;

/**
 * Onset parameter, critical wavenumber, frequency, speed and period.
 */
export function turing_point(document: string): string;

/**
 * Solves the wave at `(c* + c0, period)` by continuation from onset and
 * classifies it with Hill's method.
 */
export function wave_spectrum(document: string, c0: number, period: number, n_floquet: number, modes: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly dispersion_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly turing_point: (a: number, b: number) => [number, number, number, number];
    readonly wave_spectrum: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
