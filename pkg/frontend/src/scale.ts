/** Visual scales for the graph view.
 *
 * Both maps are strictly increasing in their count, so a node seen in
 * more images is always drawn strictly larger, and equal counts always
 * draw equal. Square root keeps large corpora from dwarfing the rest.
 */

export function nodeRadius(count: number): number {
  return 8 + 4 * Math.sqrt(Math.max(0, count));
}

export function edgeWidth(weight: number): number {
  return 1 + Math.sqrt(Math.max(0, weight));
}
