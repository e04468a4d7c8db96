// DOM rendering. Pure view over SessionView: progress is shown on a log
// scale because martingales span orders of magnitude, and every figure is a
// field from the latest service response.

import { HardestEntry, SessionStatus } from "./api.js";
import { SessionView } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
}

export function orderLabel(entry: HardestEntry): string {
    return entry.order.join(" → ");
}

export function progressPercent(entry: HardestEntry): number {
    return Math.round(Math.min(1, Math.max(0, entry.progress)) * 100);
}

function statusLine(status: SessionStatus): string {
    const p = status.p_proxy;
    return (
        `${status.draws_seen} of ${status.population} ballots · ` +
        `${status.n_trackers} alternative orders · ` +
        `${Math.round(status.certified_fraction * 100)}% ruled out · ` +
        `p ≤ ${p.toPrecision(3)}`
    );
}

export function renderStatusPanel(root: HTMLElement, view: SessionView): void {
    root.textContent = "";
    const status = view.status;
    if (!status) {
        root.append(el("p", "muted", "No session yet."));
        return;
    }

    if (view.certified) {
        const banner = el("div", "banner certified");
        banner.append(
            el("strong", "", "Audit complete: reported winner confirmed"),
            el("span", "", ` (p ≤ ${status.p_proxy.toPrecision(3)} at risk limit ${status.risk_limit})`),
        );
        root.append(banner);
    } else if (status.status === "full_count") {
        root.append(el("div", "banner fullcount", "Every ballot inspected: proceed to the full-count result."));
    }

    root.append(el("p", "status-line", statusLine(status)));

    const list = el("div", "hardest");
    list.append(el("h3", "", "Hardest alternative orders"));
    for (const entry of status.hardest) {
        const row = el("div", "order-row");
        const pct = progressPercent(entry);
        const bar = el("div", "bar");
        const fill = el("div", entry.rejected ? "fill done" : "fill");
        fill.style.width = `${pct}%`;
        bar.append(fill);
        const log10 = entry.max_martingale_log10;
        row.append(
            el("span", "order-label", orderLabel(entry)),
            bar,
            el("span", "order-value", log10 === null ? "∞" : `10^${log10.toFixed(2)}`),
        );
        row.dataset.progress = String(pct);
        list.append(row);
    }
    root.append(list);
}

export function renderEntryPanel(root: HTMLElement, view: SessionView): void {
    root.textContent = "";
    if (!view.status) return;
    const running = view.status.status === "running";

    const header = el("h3", "", "Enter drawn ballot");
    root.append(header);

    const picks = el("div", "candidates");
    for (const name of view.entry.roster) {
        const button = el("button", "candidate", name);
        button.type = "button";
        button.disabled = !running || view.busy;
        const position = view.entry.positionOf(name);
        if (position !== null) {
            button.classList.add("picked");
            button.textContent = `${position}. ${name}`;
        }
        button.dataset.candidate = name;
        button.addEventListener("click", () => {
            view.entry.toggle(name);
            renderEntryPanel(root, view);
        });
        picks.append(button);
    }
    root.append(picks);

    const preview = view.entry.ranking.length
        ? view.entry.ranking.join(" > ")
        : "(empty ballot: no standing preference)";
    root.append(el("p", "preview", preview));

    const controls = el("div", "controls");
    const submit = el("button", "submit", "Submit ballot");
    submit.type = "button";
    submit.disabled = !running || view.busy;
    submit.addEventListener("click", () => void view.submit());
    const clear = el("button", "clear", "Clear");
    clear.type = "button";
    clear.addEventListener("click", () => {
        view.entry.clear();
        renderEntryPanel(root, view);
    });
    const undo = el("button", "undo", "Undo last ballot");
    undo.type = "button";
    undo.disabled = view.busy || view.status.draws_seen === 0;
    undo.addEventListener("click", () => void view.undo());
    controls.append(submit, clear, undo);
    root.append(controls);

    if (view.error) {
        root.append(el("p", "error", view.error));
    }
    if (!running) {
        root.append(el("p", "muted", "Ballot entry is closed for this session."));
    }
}

export function renderDownloadLink(root: HTMLElement, view: SessionView): void {
    root.textContent = "";
    if (!view.status) return;
    const link = el("a", "download", "Download full tracker table (JSON)");
    link.href = "#";
    link.addEventListener("click", async (event) => {
        event.preventDefault();
        const full = await view.api.getStatus(view.sessionId, 1_000_000);
        const blob = new Blob([JSON.stringify(full, null, 2)], { type: "application/json" });
        const url = URL.createObjectURL(blob);
        const anchor = document.createElement("a");
        anchor.href = url;
        anchor.download = `${view.sessionId}-trackers.json`;
        anchor.click();
        URL.revokeObjectURL(url);
    });
    root.append(link);
}

export function renderAll(
    statusRoot: HTMLElement,
    entryRoot: HTMLElement,
    downloadRoot: HTMLElement,
    view: SessionView,
): void {
    renderStatusPanel(statusRoot, view);
    renderEntryPanel(entryRoot, view);
    renderDownloadLink(downloadRoot, view);
}
