import { ApiClient, FaceRow, FilterReport } from "../api.js";

export interface FaceGridOptions {
  /** Called after the server acknowledged a new reference face. */
  onReferenceSaved?: (faceId: string) => void;
}

/** Grid of face tiles for one entity.
 *
 * Selection is optimistic: the clicked tile is flagged immediately, and
 * the flag is rolled back if the server rejects the POST. Tints always
 * mirror the last filter report applied; the grid never invents a
 * partition of its own.
 */
export class FaceGrid {
  private referenceId: string | null = null;
  private tiles = new Map<string, HTMLElement>();
  private toast: HTMLElement | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly api: ApiClient,
    private readonly entityId: string,
    private readonly options: FaceGridOptions = {},
  ) {}

  render(faces: FaceRow[], referenceId: string | null): void {
    this.dismissToast();
    this.container.textContent = "";
    this.container.classList.add("face-grid");
    this.tiles.clear();
    this.referenceId = referenceId;
    for (const face of faces) {
      const tile = document.createElement("div");
      tile.className = "face-tile";
      tile.dataset.faceId = face.face_id;

      const img = document.createElement("img");
      img.src = face.crop_url;
      img.alt = face.face_id;

      const badge = document.createElement("div");
      badge.className = "similarity";
      badge.textContent = face.similarity_to_current_target.toFixed(3);

      tile.append(img, badge);
      if (face.face_id === referenceId) tile.classList.add("selected");
      tile.addEventListener("click", () => {
        void this.selectReference(face.face_id);
      });
      this.tiles.set(face.face_id, tile);
      this.container.append(tile);
    }
  }

  get selectedFaceId(): string | null {
    return this.referenceId;
  }

  /** Optimistically select ``faceId`` as reference and persist it. */
  async selectReference(faceId: string): Promise<void> {
    if (faceId === this.referenceId) return;
    const previous = this.referenceId;
    this.applySelection(faceId);
    this.dismissToast();
    try {
      await this.api.setReference(this.entityId, faceId);
    } catch (error) {
      this.applySelection(previous);
      const reason = error instanceof Error ? error.message : String(error);
      this.showToast(`could not set reference: ${reason}`, () => {
        void this.selectReference(faceId);
      });
      return;
    }
    this.options.onReferenceSaved?.(faceId);
  }

  /** Tint every tile per the report; kept and removed partition the grid. */
  applyReport(report: FilterReport): void {
    const kept = new Set(report.kept);
    const removed = new Set(report.removed);
    for (const [faceId, tile] of this.tiles) {
      tile.classList.toggle("kept", kept.has(faceId));
      tile.classList.toggle("removed", removed.has(faceId));
    }
  }

  clearTints(): void {
    for (const tile of this.tiles.values()) {
      tile.classList.remove("kept", "removed");
    }
  }

  private applySelection(faceId: string | null): void {
    this.referenceId = faceId;
    for (const [id, tile] of this.tiles) {
      tile.classList.toggle("selected", id === faceId);
    }
  }

  private showToast(message: string, retry: () => void): void {
    this.dismissToast();
    const toast = document.createElement("div");
    toast.className = "toast";
    const text = document.createElement("span");
    text.textContent = message;
    const button = document.createElement("button");
    button.textContent = "retry";
    button.addEventListener("click", () => {
      this.dismissToast();
      retry();
    });
    toast.append(text, button);
    this.container.append(toast);
    this.toast = toast;
  }

  private dismissToast(): void {
    this.toast?.remove();
    this.toast = null;
  }
}
