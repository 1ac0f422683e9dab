// Panel placement on the fixed 2048x1080 virtual canvas. Anchors:
// notifications above the line of sight (top-center), chat within it
// (middle-center), contacts to the right of it (middle-right), input
// directly below the chat.

export const CANVAS_W = 2048;
export const CANVAS_H = 1080;

export interface Rect {
    x: number;
    y: number;
    w: number;
    h: number;
}

export type PanelName = "notifications" | "chat" | "contacts" | "input";

const CHAT_W = 900;
const CHAT_H = 400;

export const LAYOUT: Record<PanelName, Rect> = {
    notifications: { x: (CANVAS_W - 800) / 2, y: 48, w: 800, h: 180 },
    chat: { x: (CANVAS_W - CHAT_W) / 2, y: (CANVAS_H - CHAT_H) / 2, w: CHAT_W, h: CHAT_H },
    contacts: { x: CANVAS_W - 420 - 48, y: (CANVAS_H - 480) / 2, w: 420, h: 480 },
    input: { x: (CANVAS_W - CHAT_W) / 2, y: (CANVAS_H - CHAT_H) / 2 + CHAT_H + 24, w: CHAT_W, h: 150 },
};

export function centerOf(rect: Rect): { cx: number; cy: number } {
    return { cx: rect.x + rect.w / 2, cy: rect.y + rect.h / 2 };
}

// Uniform scale that fits the whole canvas into the viewport.
export function canvasScale(viewportW: number, viewportH: number): number {
    return Math.min(viewportW / CANVAS_W, viewportH / CANVAS_H);
}

export function toViewport(rect: Rect, scale: number): Rect {
    return {
        x: Math.round(rect.x * scale),
        y: Math.round(rect.y * scale),
        w: Math.round(rect.w * scale),
        h: Math.round(rect.h * scale),
    };
}
