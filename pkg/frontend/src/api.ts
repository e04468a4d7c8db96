// Thin client for the audit session service. The console never computes
// statistics itself: every number shown to the auditor comes from these
// response documents.

export interface HardestEntry {
    order: string[];
    max_martingale_log10: number | null;
    rejected: boolean;
    progress: number;
}

export interface SessionStatus {
    id: string;
    status: "running" | "certified" | "full_count";
    draws_seen: number;
    population: number;
    n_trackers: number;
    certified_fraction: number;
    min_max_martingale_log10: number | null;
    p_proxy: number;
    risk_limit: number;
    hardest: HardestEntry[];
    candidates: string[];
    reported_winner: string;
    scheme: string;
    certified?: boolean;
}

export interface CreateSessionInput {
    candidates: string[];
    reported_winner: string;
    N: number;
    risk?: number;
    scheme?: string;
    eta0?: number;
    d?: number;
    id?: string;
}

export class ApiError extends Error {
    constructor(public status: number, message: string) {
        super(message);
    }
}

async function asJson(res: Response): Promise<any> {
    if (res.ok) {
        return res.status === 204 ? null : res.json();
    }
    let detail = res.statusText;
    try {
        const body = await res.json();
        if (typeof body.detail === "string") detail = body.detail;
        else if (body.detail) detail = JSON.stringify(body.detail);
    } catch {
        // keep the status text
    }
    throw new ApiError(res.status, detail);
}

export class AuditApi {
    constructor(public baseUrl: string) {
        this.baseUrl = baseUrl.replace(/\/+$/, "");
    }

    async createSession(input: CreateSessionInput): Promise<SessionStatus> {
        const res = await fetch(`${this.baseUrl}/sessions`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(input),
        });
        return asJson(res);
    }

    async getStatus(id: string, top?: number): Promise<SessionStatus> {
        const query = top === undefined ? "" : `?top=${top}`;
        return asJson(await fetch(`${this.baseUrl}/sessions/${id}${query}`));
    }

    async submitBallot(id: string, ranking: string[]): Promise<SessionStatus> {
        const res = await fetch(`${this.baseUrl}/sessions/${id}/ballots`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ ranking }),
        });
        return asJson(res);
    }

    async undo(id: string): Promise<SessionStatus> {
        return asJson(await fetch(`${this.baseUrl}/sessions/${id}/undo`, { method: "POST" }));
    }

    async listSessions(): Promise<Array<{ id: string; status: string; draws_seen: number }>> {
        return asJson(await fetch(`${this.baseUrl}/sessions`));
    }
}
