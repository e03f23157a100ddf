import { ApiClient, ApiError, FilterMetrics, PreviewResponse, Strategy } from "../api.js";
import type { FaceGrid } from "./faceGrid.js";

const METRIC_FIELDS: Array<keyof FilterMetrics> = ["precision", "recall", "f1"];

/** Strategy picker, threshold slider, and metrics panel for one entity.
 *
 * Each preview round-trips to the server and pushes the returned report
 * into the grid; metric values are displayed exactly as received.
 */
export class FilterControls {
  lambda1 = 0.757;
  strategy: Strategy = "mean";

  private slider!: HTMLInputElement;
  private sliderValue!: HTMLElement;
  private strategySelect!: HTMLSelectElement;
  private metricsPanel!: HTMLElement;
  private prompt!: HTMLElement;

  constructor(
    private readonly container: HTMLElement,
    private readonly api: ApiClient,
    private readonly entityId: string,
    private readonly grid: FaceGrid,
  ) {}

  render(): void {
    this.container.textContent = "";
    this.container.classList.add("controls");

    const strategyLabel = document.createElement("label");
    strategyLabel.textContent = "strategy ";
    this.strategySelect = document.createElement("select");
    for (const value of ["mean", "reference"] as const) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value;
      this.strategySelect.append(option);
    }
    this.strategySelect.value = this.strategy;
    this.strategySelect.addEventListener("change", () => {
      this.strategy = this.strategySelect.value as Strategy;
      void this.preview();
    });
    strategyLabel.append(this.strategySelect);

    const sliderLabel = document.createElement("label");
    sliderLabel.textContent = "threshold ";
    this.slider = document.createElement("input");
    this.slider.type = "range";
    this.slider.min = "-1";
    this.slider.max = "1";
    this.slider.step = "0.001";
    this.slider.value = String(this.lambda1);
    this.sliderValue = document.createElement("span");
    this.sliderValue.className = "lambda-value";
    this.sliderValue.textContent = this.slider.value;
    this.slider.addEventListener("input", () => {
      this.sliderValue.textContent = this.slider.value;
    });
    // round-trip only when the drag settles
    this.slider.addEventListener("change", () => {
      this.lambda1 = Number(this.slider.value);
      void this.preview();
    });
    sliderLabel.append(this.slider, this.sliderValue);

    this.metricsPanel = document.createElement("div");
    this.metricsPanel.className = "metrics-panel";

    this.prompt = document.createElement("div");
    this.prompt.className = "reference-prompt";
    this.prompt.textContent = "Select a reference face first.";
    this.prompt.hidden = true;

    this.container.append(strategyLabel, sliderLabel, this.metricsPanel, this.prompt);
  }

  setLambda(value: number): void {
    this.lambda1 = value;
    this.slider.value = String(value);
    this.sliderValue.textContent = this.slider.value;
  }

  async preview(): Promise<PreviewResponse | null> {
    let response: PreviewResponse;
    try {
      response = await this.api.previewFilter(this.entityId, this.strategy, this.lambda1);
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        this.prompt.hidden = false;
        return null;
      }
      throw error;
    }
    this.prompt.hidden = true;
    this.grid.applyReport(response.report);
    this.renderMetrics(response.metrics);
    return response;
  }

  private renderMetrics(metrics: FilterMetrics | null): void {
    this.metricsPanel.textContent = "";
    if (metrics === null) {
      this.metricsPanel.textContent = "no ground truth annotations";
      return;
    }
    for (const field of METRIC_FIELDS) {
      const cell = document.createElement("span");
      cell.className = "metric";
      cell.dataset.metric = field;
      const value = document.createElement("b");
      value.textContent = String(metrics[field]);
      cell.append(`${field} `, value);
      this.metricsPanel.append(cell);
    }
    if (metrics.degenerate) {
      const note = document.createElement("span");
      note.className = "metric";
      note.textContent = "(degenerate)";
      this.metricsPanel.append(note);
    }
  }
}
