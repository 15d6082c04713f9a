/* tslint:disable */
/* eslint-disable */

/**
 * Transmit beam pattern of radio `i` for one trial, with and without the
 * radar-aware design.
 */
export function beamPattern(seed: number, snr_db: number, num_targets: number): string;

/**
 * Mean spectral efficiency over the default SNR grid.
 */
export function rateCurve(trials: number, num_targets: number, seed: number): string;

/**
 * Radar SIR CDFs pooled over `trials` draws at 0 dB link SNR.
 */
export function sirCdf(trials: number, num_targets: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly beamPattern: (a: number, b: number, c: number) => [number, number, number, number];
    readonly rateCurve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly sirCdf: (a: number, b: number, c: number) => [number, number, number, number];
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
