/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_analysis_free: (a: number, b: number) => void;
export const analysis_accepted: (a: number) => number;
export const analysis_b1: (a: number) => number;
export const analysis_b2: (a: number) => number;
export const analysis_fitError: (a: number) => [number, number];
export const analysis_offset: (a: number) => number;
export const analysis_params: (a: number) => [number, number];
export const analysis_pearsonR: (a: number) => number;
export const analysis_reason: (a: number) => [number, number];
export const analysis_simulated: (a: number) => [number, number];
export const analysis_stamps: (a: number) => [number, number];
export const analyze: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const detectPeaks: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const simulatePopularity: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const spikeScores: (a: number, b: number, c: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
