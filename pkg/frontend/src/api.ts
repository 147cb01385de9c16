// Typed client for the perspecml server. The board talks to nothing else.

export interface PerspectiveDto {
  id: string;
  display_name: string;
  color: string;
  description: string;
}

export interface RoleDto {
  code: string;
  display_name: string;
  description: string;
}

export interface TaskDto {
  id: string;
  perspective: string;
  name: string;
  description: string;
  suggested_roles: string[];
  concern_ids: string[];
}

export interface ConcernDto {
  id: string;
  name: string;
  prompt: string;
  description: string;
  experimental: boolean;
}

export interface RelationshipDto {
  from: string;
  to: string;
  kind: string;
  rationale: string;
  provenance: string;
}

export interface CatalogDto {
  version: number;
  perspectives: PerspectiveDto[];
  roles: RoleDto[];
  tasks: TaskDto[];
  concerns: ConcernDto[];
  relationships: RelationshipDto[];
}

export interface PerspectiveCoverageDto {
  perspective: string;
  addressed: number;
  applicable: number;
  total: number;
  unaddressed: string[];
}

export interface CoverageDto {
  addressed: number;
  applicable: number;
  total: number;
  per_perspective: PerspectiveCoverageDto[];
}

export interface DocumentEntryDto {
  concern: string;
  disposition: "applicable" | "not_applicable";
  relevance?: string;
  spec?: string;
  by?: string[];
  status?: string;
  reason?: string;
  experimental?: boolean;
}

export interface SessionDto {
  id: string;
  project: string;
  pass: number;
  cursor: string | null;
  status: Record<string, "pending" | "decided" | "skipped">;
  entries: { entries: DocumentEntryDto[] };
  coverage: CoverageDto;
}

export interface RelatedDto {
  concern: string;
  name: string;
  kind: string;
  direction: string;
  rationale: string;
  status: "addressed" | "unaddressed";
}

export interface PromptDto {
  done: boolean;
  pass: number;
  position?: number;
  total?: number;
  concern?: { id: string; name: string; prompt: string; description: string; experimental: boolean };
  perspective?: { id: string; display_name: string; color: string };
  task?: { id: string; name: string; suggested_roles: string[] } | null;
  related?: RelatedDto[];
  coverage?: CoverageDto;
}

export interface DecisionBody {
  concern: string;
  kind: "applicable" | "not_applicable" | "skip";
  relevance?: string;
  spec?: string;
  by?: string[];
  reason?: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const text = await response.text();
  if (!response.ok) {
    let code = `HTTP ${response.status}`;
    let message = text;
    try {
      const body = JSON.parse(text);
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body; keep raw text
    }
    throw new ApiError(response.status, code, message);
  }
  return JSON.parse(text) as T;
}

export const getCatalog = (base: string) => request<CatalogDto>(`${base}/api/catalog`);

export const createSession = (base: string, project = "") =>
  request<SessionDto>(`${base}/api/sessions`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ project }),
  });

export const getSession = (base: string, id: string) =>
  request<SessionDto>(`${base}/api/sessions/${id}`);

export const getPrompt = (base: string, id: string) =>
  request<PromptDto>(`${base}/api/sessions/${id}/prompt`);

export const postDecision = (base: string, id: string, body: DecisionBody) =>
  request<PromptDto>(`${base}/api/sessions/${id}/decision`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });

export const postRevisit = (base: string, id: string, concern: string) =>
  request<PromptDto>(`${base}/api/sessions/${id}/revisit`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ concern }),
  });

export const exportUrl = (base: string, id: string) => `${base}/api/sessions/${id}/export`;

export const renderUrl = (base: string, id: string, kind: "diagram" | "template") =>
  `${base}/api/sessions/${id}/render/${kind}`;
