// Input capture: arrow keys and space stand in for the ring mouse, clicks
// on rendered targets for mid-air presses, a text box for the speech
// recognizer. Emits raw session events; all interpretation happens
// server-side.

export const HOLD_THRESHOLD_MS = 1000;
export const TICK_INTERVAL_MS = 100; // 10 Hz drives silence-gap expiry

export type EventSink = (payload: Record<string, unknown>) => void;

const ARROW_TO_BUTTON: Record<string, string> = {
    ArrowUp: "up",
    ArrowDown: "down",
    ArrowLeft: "left",
    ArrowRight: "right",
};

export function ringClick(button: string): Record<string, unknown> {
    return { kind: "ring", button, press: "click", duration_ms: 0 };
}

export function ringHold(button: string, durationMs: number): Record<string, unknown> {
    return { kind: "ring", button, press: "hold", duration_ms: durationMs };
}

export function gesturePress(target: string, name = ""): Record<string, unknown> {
    return { kind: "gesture", gesture: "press", target, name };
}

export function gestureSwipe(direction: "up" | "down"): Record<string, unknown> {
    return { kind: "gesture", gesture: `swipe_${direction}` };
}

export function utterance(text: string): Record<string, unknown> {
    return { kind: "utterance", text };
}

export function keyboardText(text: string): Record<string, unknown> {
    return { kind: "keyboard_text", text };
}

export class InputBinder {
    private sink: EventSink;
    private spaceDownAt: number | null = null;
    private spaceHoldTimer: ReturnType<typeof setTimeout> | null = null;
    private spaceHoldFired = false;
    private tickTimer: ReturnType<typeof setInterval> | null = null;
    enabled = true;

    constructor(sink: EventSink) {
        this.sink = sink;
    }

    private emit(payload: Record<string, unknown>): void {
        if (this.enabled) {
            this.sink(payload);
        }
    }

    startTicks(): void {
        if (this.tickTimer === null) {
            this.tickTimer = setInterval(
                () => this.emit({ kind: "tick" }),
                TICK_INTERVAL_MS,
            );
        }
    }

    stopTicks(): void {
        if (this.tickTimer !== null) {
            clearInterval(this.tickTimer);
            this.tickTimer = null;
        }
    }

    // --- ring mouse on the keyboard ------------------------------------
    // Arrows click the four directional buttons. Space is the center
    // button: a short press clicks, holding it for a second fires the
    // hold (hide/reveal) without waiting for the key to come up.

    keyDown(key: string, now: number): void {
        const button = ARROW_TO_BUTTON[key];
        if (button !== undefined) {
            this.emit(ringClick(button));
            return;
        }
        if (key === " " && this.spaceDownAt === null) {
            this.spaceDownAt = now;
            this.spaceHoldFired = false;
            this.spaceHoldTimer = setTimeout(() => {
                this.spaceHoldFired = true;
                this.emit(ringHold("center", HOLD_THRESHOLD_MS));
            }, HOLD_THRESHOLD_MS);
        }
    }

    keyUp(key: string, now: number): void {
        if (key !== " " || this.spaceDownAt === null) {
            return;
        }
        const heldFor = now - this.spaceDownAt;
        this.spaceDownAt = null;
        if (this.spaceHoldTimer !== null) {
            clearTimeout(this.spaceHoldTimer);
            this.spaceHoldTimer = null;
        }
        if (!this.spaceHoldFired && heldFor < HOLD_THRESHOLD_MS) {
            this.emit(ringClick("center"));
        }
    }

    // --- mid-air gestures as clicks --------------------------------------
    // Rendered targets carry data-target (and data-name) attributes; a
    // click anywhere else on the overlay is a plain press.

    click(element: Element | null): void {
        const target = element?.closest?.("[data-target]") ?? null;
        if (target === null) {
            this.emit(gesturePress("anywhere"));
            return;
        }
        const kind = target.getAttribute("data-target") ?? "anywhere";
        const name = target.getAttribute("data-name") ?? "";
        this.emit(gesturePress(kind, name));
    }

    wheel(deltaY: number): void {
        this.emit(gestureSwipe(deltaY < 0 ? "up" : "down"));
    }

    // --- utterance box -----------------------------------------------------

    submitUtterance(text: string): void {
        this.emit(utterance(text));
    }

    commitKeyboardText(text: string): void {
        if (text.length > 0) {
            this.emit(keyboardText(text));
        }
    }

    bindTo(doc: Document, overlay: HTMLElement, utteranceBox: HTMLInputElement): void {
        doc.addEventListener("keydown", (ev) => {
            if (doc.activeElement === utteranceBox) {
                return; // typing a transcript, not driving the ring
            }
            if (ev.key === " " && ev.repeat) {
                return;
            }
            this.keyDown(ev.key, Date.now());
        });
        doc.addEventListener("keyup", (ev) => {
            if (doc.activeElement === utteranceBox) {
                return;
            }
            this.keyUp(ev.key, Date.now());
        });
        overlay.addEventListener("click", (ev) => {
            this.click(ev.target as Element);
        });
        overlay.addEventListener("wheel", (ev) => {
            this.wheel((ev as WheelEvent).deltaY);
        });
        utteranceBox.addEventListener("keydown", (ev) => {
            if (ev.key === "Enter") {
                this.submitUtterance(utteranceBox.value);
                utteranceBox.value = "";
                ev.stopPropagation();
            }
        });
    }
}
