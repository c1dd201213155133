// Mirrors of the service wire format. Field names match the JSON exactly;
// the server stays authoritative for all semantics.

export type WallName = "north" | "east" | "south" | "west";
export type OpeningKind = "door" | "window";

export interface Opening {
  kind: OpeningKind;
  wall: WallName;
  offset_m: number;
  width_m: number;
}

export interface DesignRequest {
  room_type: string;
  style: string;
  room_width_m: number;
  room_depth_m: number;
  openings: Opening[];
  furniture_categories: string[];
  store: string;
  seed: number | null;
  items_per_category: number;
}

export interface EvaluationReport {
  predicted_room_type: string;
  room_type_confidence: number;
  predicted_style: string;
  style_confidence: number;
  room_type_match: boolean;
  style_match: boolean;
  final_score: number;
  room_type_distribution?: Record<string, number>;
  style_distribution?: Record<string, number>;
}

export type JobState =
  | "queued"
  | "retrieving"
  | "composing"
  | "generating"
  | "evaluating"
  | "done"
  | "failed";

export const JOB_STATES: JobState[] = [
  "queued",
  "retrieving",
  "composing",
  "generating",
  "evaluating",
  "done",
];

export interface JobError {
  stage: string;
  type: string;
  message: string;
}

export interface DesignJob {
  job_id: string;
  request: DesignRequest;
  state: JobState;
  artifacts: Record<string, { sha256: string; media_type: string }>;
  report: EvaluationReport | null;
  error: JobError | null;
  timestamps: Record<string, string>;
}

export interface JobPage {
  jobs: DesignJob[];
  page: number;
  page_size: number;
  total: number;
}

export interface Labels {
  room_types: string[];
  styles: string[];
}

export interface ValidationIssue {
  field: string;
  message: string;
}

export function emptyRequest(): DesignRequest {
  return {
    room_type: "",
    style: "",
    room_width_m: 4,
    room_depth_m: 3,
    openings: [],
    furniture_categories: [],
    store: "ikea",
    seed: null,
    items_per_category: 1,
  };
}
