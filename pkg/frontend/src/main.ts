import { ApiClient, ApiError, EntitySummary } from "./api.js";
import { renderEntityList } from "./views/entityList.js";
import { FaceGrid } from "./views/faceGrid.js";
import { FilterControls } from "./views/filterControls.js";
import { renderGraph, renderGraphEmpty } from "./views/graphView.js";

const api = new ApiClient();

const app = document.getElementById("app")!;
app.innerHTML = `
  <header class="topbar">
    <h1>facegraph curation</h1>
    <nav>
      <button type="button" data-tab="entities" class="active">Entities</button>
      <button type="button" data-tab="graph">Graph</button>
    </nav>
  </header>
  <div class="layout" id="entities-tab">
    <div id="sidebar"></div>
    <main class="content">
      <div id="controls"></div>
      <div id="grid"></div>
    </main>
  </div>
  <div class="layout" id="graph-tab" hidden>
    <main class="content"><div id="graph"></div></main>
  </div>
`;

const sidebar = document.getElementById("sidebar")!;
const controlsHost = document.getElementById("controls")!;
const gridHost = document.getElementById("grid")!;
const graphHost = document.getElementById("graph")!;

let entities: EntitySummary[] = [];
let activeEntity: EntitySummary | null = null;

async function refreshSidebar(): Promise<void> {
  entities = await api.listEntities();
  renderEntityList(sidebar, entities, (entity) => void openEntity(entity),
    activeEntity?.entity_id ?? null);
}

/** Open one entity: fresh render of the server's current state.
 *
 * When a reference exists, a reference-strategy preview runs first; the
 * session then reports similarities against the reference, whose own tile
 * lists first (self similarity 1.0), which restores the selection.
 */
async function openEntity(entity: EntitySummary): Promise<void> {
  activeEntity = entity;
  const grid = new FaceGrid(gridHost, api, entity.entity_id, {
    onReferenceSaved: () => void refreshSidebar(),
  });
  const controls = new FilterControls(controlsHost, api, entity.entity_id, grid);
  controls.render();

  let preview = null;
  if (entity.reference_set) {
    controls.strategy = "reference";
    preview = await controls.preview();
  }
  const faces = await api.listFaces(entity.entity_id);
  const restored =
    entity.reference_set && faces.length > 0 ? faces[0].face_id : null;
  grid.render(faces, restored);
  if (preview) grid.applyReport(preview.report);
  await refreshSidebar();
}

async function openGraph(): Promise<void> {
  try {
    renderGraph(graphHost, await api.fetchGraph());
  } catch (error) {
    if (error instanceof ApiError && error.status === 404) {
      renderGraphEmpty(graphHost, "No identification run yet.");
      return;
    }
    throw error;
  }
}

for (const button of app.querySelectorAll<HTMLButtonElement>("nav button")) {
  button.addEventListener("click", () => {
    for (const other of app.querySelectorAll("nav button")) {
      other.classList.toggle("active", other === button);
    }
    const showGraph = button.dataset.tab === "graph";
    document.getElementById("entities-tab")!.hidden = showGraph;
    document.getElementById("graph-tab")!.hidden = !showGraph;
    if (showGraph) void openGraph();
  });
}

void (async () => {
  await refreshSidebar();
  if (entities.length > 0) await openEntity(entities[0]);
})();
