// The transformers runtime is an optional install (it pulls a native ONNX
// backend); this shim keeps the dynamic import type-checkable without it.
declare module "@huggingface/transformers" {
  export const pipeline: (task: string, model?: string, options?: unknown) => Promise<any>;
}
