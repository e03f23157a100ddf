import type { EntitySummary } from "../api.js";

/** Sidebar listing of entities, a straight render of the server rows. */
export function renderEntityList(
  container: HTMLElement,
  entities: EntitySummary[],
  onSelect: (entity: EntitySummary) => void,
  activeId: string | null = null,
): void {
  container.textContent = "";
  const list = document.createElement("ul");
  list.className = "entity-list";
  for (const entity of entities) {
    const item = document.createElement("li");
    item.dataset.entityId = entity.entity_id;
    if (entity.entity_id === activeId) item.classList.add("active");

    const name = document.createElement("span");
    name.className = "entity-name";
    name.textContent = entity.display_name || entity.entity_id;

    const meta = document.createElement("span");
    meta.className = "entity-meta";
    meta.textContent = `${entity.sample_count} faces`;

    item.append(name, meta);
    if (entity.reference_set) {
      const badge = document.createElement("span");
      badge.className = "ref-badge";
      badge.textContent = "ref";
      badge.title = "reference face selected";
      item.append(badge);
    }
    item.addEventListener("click", () => onSelect(entity));
    list.append(item);
  }
  container.append(list);
}
