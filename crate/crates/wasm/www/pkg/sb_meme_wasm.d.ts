/* tslint:disable */
/* eslint-disable */

/**
 * Result of [`analyze`]. Stamps are `[t0, ta1, t1, tf1, ta2, t2, tf2, T]`.
 */
export class Analysis {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly accepted: boolean;
    readonly b1: number;
    readonly b2: number;
    /**
     * Why the model fit failed, empty on success.
     */
    readonly fitError: string;
    /**
     * Tick of the input where the simulated curve starts.
     */
    readonly offset: number;
    /**
     * `[p1, q1, m1, p2, q2, m2]` of the fitted model.
     */
    readonly params: Float64Array;
    /**
     * NaN when no fit was made.
     */
    readonly pearsonR: number;
    /**
     * Rejection reason, empty when accepted.
     */
    readonly reason: string;
    readonly simulated: Float64Array;
    readonly stamps: Uint32Array;
}

/**
 * Identifies the two beauties and, when accepted, fits and simulates the
 * model using the meme's own innovation coefficients.
 */
export function analyze(values: Float64Array, k: number, h: number, alpha: number): Analysis;

/**
 * Ticks of the meaningful peaks.
 */
export function detectPeaks(values: Float64Array, k: number, h: number): Uint32Array;

/**
 * Per-tick popularity of a two-generation model over `0..=horizon`.
 */
export function simulatePopularity(p1: number, q1: number, m1: number, p2: number, q2: number, m2: number, onset: number, horizon: number): Float64Array;

export function spikeScores(values: Float64Array, k: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_analysis_free: (a: number, b: number) => void;
    readonly analysis_accepted: (a: number) => number;
    readonly analysis_b1: (a: number) => number;
    readonly analysis_b2: (a: number) => number;
    readonly analysis_fitError: (a: number) => [number, number];
    readonly analysis_offset: (a: number) => number;
    readonly analysis_params: (a: number) => [number, number];
    readonly analysis_pearsonR: (a: number) => number;
    readonly analysis_reason: (a: number) => [number, number];
    readonly analysis_simulated: (a: number) => [number, number];
    readonly analysis_stamps: (a: number) => [number, number];
    readonly analyze: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly detectPeaks: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly simulatePopularity: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly spikeScores: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
