/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demoparams_free: (a: number, b: number) => void;
export const __wbg_get_survivalcurve_periods: (a: number) => number;
export const __wbg_raster_free: (a: number, b: number) => void;
export const __wbg_set_survivalcurve_periods: (a: number, b: number) => void;
export const __wbg_survivalcurve_free: (a: number, b: number) => void;
export const amplitude_curves: (a: number, b: number, c: number) => [number, number, number, number];
export const dark_survival: (a: number, b: bigint, c: bigint, d: number) => [number, number, number];
export const demoparams_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const emission_raster: (a: number, b: bigint, c: bigint, d: number) => [number, number, number];
export const raster_dark_periods: (a: number) => [number, number];
export const raster_fluorescent: (a: number) => [number, number];
export const raster_reset_gamma: (a: number) => [number, number];
export const raster_reset_gamma_prime: (a: number) => [number, number];
export const survivalcurve_durations: (a: number) => [number, number];
export const survivalcurve_empirical: (a: number) => [number, number];
export const survivalcurve_oracle: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
