/**
 * Color scheme: text color per knowledge type (parameters override their
 * Variable type color), indicator ball color per access level. The mapping
 * is frozen; tests assert it against the committed table fixture.
 */

export const TEXT_COLOR_BY_TYPE: Record<string, string> = {
  namespace: "grey",
  class: "blue",
  constructor: "teal",
  method: "red",
  property: "purple",
  variable: "magenta",
  delegate: "olive",
  event: "cyan",
};

export const TEXT_COLOR_BY_KIND_TAG: Record<string, string> = {
  parameter: "orange",
};

export const INDICATOR_COLOR_BY_ACCESS: Record<string, string> = {
  public: "green",
  private: "red",
  other: "yellow",
};

const FALLBACK_TEXT_COLOR = "black";

export function textColorFor(typeId: string, kindTag: string | null): string {
  if (kindTag && TEXT_COLOR_BY_KIND_TAG[kindTag]) {
    return TEXT_COLOR_BY_KIND_TAG[kindTag];
  }
  return TEXT_COLOR_BY_TYPE[typeId] ?? FALLBACK_TEXT_COLOR;
}

export function indicatorColorFor(access: string): string {
  return INDICATOR_COLOR_BY_ACCESS[access] ?? INDICATOR_COLOR_BY_ACCESS.other;
}
