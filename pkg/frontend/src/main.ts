// Bootstrap: create-session form plus the live entry/status panels.

import { AuditApi } from "./api.js";
import { SessionView } from "./state.js";
import { renderAll } from "./ui.js";

function field(id: string): HTMLInputElement {
    return document.getElementById(id) as HTMLInputElement;
}

export function boot(document_: Document = document): void {
    const form = document_.getElementById("create-form") as HTMLFormElement;
    const statusRoot = document_.getElementById("status-panel") as HTMLElement;
    const entryRoot = document_.getElementById("entry-panel") as HTMLElement;
    const downloadRoot = document_.getElementById("download-panel") as HTMLElement;
    const formError = document_.getElementById("form-error") as HTMLElement;

    form.addEventListener("submit", async (event) => {
        event.preventDefault();
        formError.textContent = "";
        const roster = field("candidates").value.split(",").map((s) => s.trim()).filter(Boolean);
        const api = new AuditApi(field("base-url").value || window.location.origin);
        const view = new SessionView(api, roster);
        view.onChange(() => renderAll(statusRoot, entryRoot, downloadRoot, view));
        await view.create({
            candidates: roster,
            reported_winner: field("reported-winner").value.trim(),
            N: parseInt(field("population").value, 10),
            risk: parseFloat(field("risk").value),
            scheme: field("scheme").value.trim() || "largest",
            eta0: parseFloat(field("eta0").value),
            d: parseFloat(field("d").value),
        });
        if (view.error) {
            formError.textContent = view.error;
        }
    });
}

if (typeof window !== "undefined" && typeof document !== "undefined" && document.getElementById("create-form")) {
    boot();
}
