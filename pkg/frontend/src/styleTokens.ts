export type RiskLevel = "DANGER" | "WARNING" | "SAFE";

// Must stay byte-identical to the overlay renderer's palette.
export const STYLE_TOKENS: Record<RiskLevel, string> = {
  DANGER: "#d32f2f",
  WARNING: "#ffb300",
  SAFE: "#2e7d32",
};

const NEUTRAL = "#607d8b";

/** Pure level -> colour mapping; unknown levels render neutral. */
export function styleToken(level: string): string {
  return STYLE_TOKENS[level as RiskLevel] ?? NEUTRAL;
}
