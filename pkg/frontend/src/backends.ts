export type BackendLabel = "SKELETON" | "VLM";

export interface BackendBinding {
  readonly label: BackendLabel;
  readonly apiPrefix: "/skel-api" | "/api";
  readonly wsPrefix: "/skel-ws" | "/ws";
}

// One-to-one: each label owns exactly one prefix pair.
export const BINDINGS: Record<BackendLabel, BackendBinding> = {
  SKELETON: { label: "SKELETON", apiPrefix: "/skel-api", wsPrefix: "/skel-ws" },
  VLM: { label: "VLM", apiPrefix: "/api", wsPrefix: "/ws" },
};

export function bindingFor(label: BackendLabel): BackendBinding {
  return BINDINGS[label];
}
