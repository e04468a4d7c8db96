// Console-side state: the in-progress ballot ranking and the latest
// session snapshot. A failed submission must leave the ranking intact so
// the auditor can fix or retry without re-entering it.

import { ApiError, AuditApi, SessionStatus } from "./api.js";

export class BallotEntry {
    private selection: string[] = [];

    constructor(public roster: string[]) {}

    /** Ordered selection: clicking an unselected candidate appends it,
     *  clicking a selected one removes it (later picks keep their order). */
    toggle(name: string): void {
        if (!this.roster.includes(name)) {
            throw new Error(`unknown candidate ${name}`);
        }
        const at = this.selection.indexOf(name);
        if (at >= 0) {
            this.selection.splice(at, 1);
        } else {
            this.selection.push(name);
        }
    }

    positionOf(name: string): number | null {
        const at = this.selection.indexOf(name);
        return at >= 0 ? at + 1 : null;
    }

    get ranking(): string[] {
        return [...this.selection];
    }

    clear(): void {
        this.selection = [];
    }
}

export interface ViewListener {
    (view: SessionView): void;
}

export class SessionView {
    status: SessionStatus | null = null;
    entry: BallotEntry;
    error: string | null = null;
    busy = false;
    private listeners: ViewListener[] = [];

    constructor(public api: AuditApi, roster: string[]) {
        this.entry = new BallotEntry(roster);
    }

    onChange(listener: ViewListener): void {
        this.listeners.push(listener);
    }

    private emit(): void {
        for (const listener of this.listeners) listener(this);
    }

    get sessionId(): string {
        if (!this.status) throw new Error("no session yet");
        return this.status.id;
    }

    get certified(): boolean {
        return this.status !== null && this.status.p_proxy <= this.status.risk_limit;
    }

    async create(input: Parameters<AuditApi["createSession"]>[0]): Promise<void> {
        await this.run(async () => {
            this.status = await this.api.createSession(input);
        });
    }

    async refresh(): Promise<void> {
        await this.run(async () => {
            this.status = await this.api.getStatus(this.sessionId);
        });
    }

    /** Submit the in-progress ranking; cleared only when the service accepts it.
     *  The submit reply carries a 5-row summary, so refetch the full
     *  status (10 hardest orders) for the panel. */
    async submit(): Promise<void> {
        await this.run(async () => {
            this.status = await this.api.submitBallot(this.sessionId, this.entry.ranking);
            this.entry.clear();
            this.status = await this.api.getStatus(this.status.id);
        });
    }

    async undo(): Promise<void> {
        await this.run(async () => {
            this.status = await this.api.undo(this.sessionId);
        });
    }

    private async run(op: () => Promise<void>): Promise<void> {
        this.busy = true;
        this.error = null;
        this.emit();
        try {
            await op();
        } catch (err) {
            if (err instanceof ApiError) {
                this.error = `${err.status}: ${err.message}`;
            } else {
                this.error = `connection failed: ${(err as Error).message ?? err}`;
            }
        } finally {
            this.busy = false;
            this.emit();
        }
    }
}
