import type { GraphDoc, GraphNode } from "../api.js";
import { edgeWidth, nodeRadius } from "../scale.js";

/** Past this many nodes the view shows only the heaviest ones. */
export const MAX_RENDERED_NODES = 500;

const SVG_NS = "http://www.w3.org/2000/svg";
const SIZE = 640;
const LAYOUT_RADIUS = SIZE * 0.38;

function topNodes(nodes: GraphNode[]): GraphNode[] {
  if (nodes.length <= MAX_RENDERED_NODES) return nodes;
  return [...nodes]
    .sort((a, b) => b.weight - a.weight || a.id.localeCompare(b.id))
    .slice(0, MAX_RENDERED_NODES);
}

/** Read-only node-link rendering of the co-occurrence graph.
 *
 * Nodes sit on a circle in id order, sized by how many images they
 * appeared in; edges are sized by how many images the pair shared.
 */
export function renderGraph(container: HTMLElement, doc: GraphDoc): void {
  container.textContent = "";
  container.classList.add("graph-view");

  const rendered = topNodes(doc.nodes);
  if (rendered.length < doc.nodes.length) {
    const notice = document.createElement("div");
    notice.className = "cap-notice";
    notice.textContent =
      `showing the ${rendered.length} most frequent of ${doc.nodes.length} persons`;
    container.append(notice);
  }

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${SIZE} ${SIZE}`);
  svg.setAttribute("width", String(SIZE));
  svg.setAttribute("height", String(SIZE));

  const position = new Map<string, { x: number; y: number }>();
  const ordered = [...rendered].sort((a, b) => a.id.localeCompare(b.id));
  ordered.forEach((node, index) => {
    const angle = (2 * Math.PI * index) / ordered.length - Math.PI / 2;
    position.set(node.id, {
      x: SIZE / 2 + LAYOUT_RADIUS * Math.cos(angle),
      y: SIZE / 2 + LAYOUT_RADIUS * Math.sin(angle),
    });
  });

  // edges under nodes; skip edges whose endpoint fell to the node cap
  for (const edge of doc.edges) {
    const from = position.get(edge.source);
    const to = position.get(edge.target);
    if (!from || !to) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.classList.add("graph-edge");
    line.dataset.source = edge.source;
    line.dataset.target = edge.target;
    line.setAttribute("x1", String(from.x));
    line.setAttribute("y1", String(from.y));
    line.setAttribute("x2", String(to.x));
    line.setAttribute("y2", String(to.y));
    line.setAttribute("stroke-width", String(edgeWidth(edge.weight)));
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${edge.source} with ${edge.target} in ${edge.weight} images`;
    line.append(title);
    svg.append(line);
  }

  for (const node of ordered) {
    const spot = position.get(node.id)!;
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.classList.add("graph-node");
    circle.dataset.nodeId = node.id;
    circle.setAttribute("cx", String(spot.x));
    circle.setAttribute("cy", String(spot.y));
    circle.setAttribute("r", String(nodeRadius(node.weight)));
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${node.label}: ${node.weight} images`;
    circle.append(title);
    svg.append(circle);

    const label = document.createElementNS(SVG_NS, "text");
    label.classList.add("graph-label");
    label.setAttribute("x", String(spot.x));
    label.setAttribute("y", String(spot.y + nodeRadius(node.weight) + 14));
    label.textContent = node.label;
    svg.append(label);
  }

  container.append(svg);
}

export function renderGraphEmpty(container: HTMLElement, message: string): void {
  container.textContent = "";
  container.classList.add("graph-view");
  const empty = document.createElement("div");
  empty.className = "empty-state";
  empty.textContent = message;
  container.append(empty);
}
