/**
 * Per-column UI state: visibility, order, expansion and checked sets.
 * Persisted in browser local storage so layout survives reloads.
 */

export interface ColumnState {
  typeId: string;
  visible: boolean;
  position: number;
  expanded: Set<string>;
  checked: Set<string>;
}

export const STORAGE_KEY = "tracegraph.columns.v1";

// Columns shown on a fresh project until the user opens the chooser.
export const DEFAULT_VISIBLE = ["namespace", "class", "method", "variable"];

export function defaultColumnStates(typeIds: string[]): ColumnState[] {
  return typeIds.map((typeId, index) => ({
    typeId,
    visible: DEFAULT_VISIBLE.includes(typeId),
    position: index,
    expanded: new Set<string>(),
    checked: new Set<string>(),
  }));
}

export function displayedColumns(states: ColumnState[]): ColumnState[] {
  return states
    .filter((s) => s.visible)
    .sort((a, b) => a.position - b.position || a.typeId.localeCompare(b.typeId));
}

export function moveColumn(states: ColumnState[], typeId: string, delta: number): void {
  const ordered = [...states].sort((a, b) => a.position - b.position);
  const from = ordered.findIndex((s) => s.typeId === typeId);
  const to = from + delta;
  if (from < 0 || to < 0 || to >= ordered.length) {
    return;
  }
  const [moved] = ordered.splice(from, 1);
  ordered.splice(to, 0, moved);
  ordered.forEach((state, index) => {
    state.position = index;
  });
}

interface StoredColumn {
  typeId: string;
  visible: boolean;
  position: number;
}

export function saveColumnStates(storage: Storage, states: ColumnState[]): void {
  const slim: StoredColumn[] = states.map(({ typeId, visible, position }) => ({
    typeId,
    visible,
    position,
  }));
  storage.setItem(STORAGE_KEY, JSON.stringify(slim));
}

export function loadColumnStates(storage: Storage, typeIds: string[]): ColumnState[] {
  const states = defaultColumnStates(typeIds);
  const raw = storage.getItem(STORAGE_KEY);
  if (!raw) {
    return states;
  }
  let stored: StoredColumn[];
  try {
    stored = JSON.parse(raw) as StoredColumn[];
  } catch {
    return states;
  }
  if (!Array.isArray(stored)) {
    return states;
  }
  for (const entry of stored) {
    const state = states.find((s) => s.typeId === entry.typeId);
    if (state && typeof entry.position === "number") {
      state.visible = Boolean(entry.visible);
      state.position = entry.position;
    }
  }
  // repair positions into a clean permutation after partial/stale data
  [...states]
    .sort((a, b) => a.position - b.position || a.typeId.localeCompare(b.typeId))
    .forEach((state, index) => {
      state.position = index;
    });
  return states;
}
