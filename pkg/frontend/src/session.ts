// WebSocket session: raw input events go up, render payloads come down.
// The server runs the actual interaction engine; this class only shuttles
// frames and tracks connectivity.

import {
    RenderPayload,
    decodeFrame,
    eventFrame,
    parseRenderPayload,
} from "./protocol.js";

// Minimal surface of a browser WebSocket; lets tests plug in the "ws"
// package's client.
export interface SocketLike {
    send(data: string): void;
    close(): void;
    addEventListener(type: string, listener: (ev: any) => void): void;
    readyState: number;
}

export type SocketFactory = (url: string) => SocketLike;

export interface SessionHandlers {
    onRender: (payload: RenderPayload) => void;
    onStatus?: (connected: boolean) => void;
    onError?: (code: string) => void;
}

export class SessionClient {
    readonly url: string;
    private handlers: SessionHandlers;
    private factory: SocketFactory;
    private socket: SocketLike | null = null;
    connected = false;

    constructor(url: string, handlers: SessionHandlers, factory?: SocketFactory) {
        this.url = url;
        this.handlers = handlers;
        this.factory = factory ?? ((u) => new (globalThis as any).WebSocket(u));
    }

    connect(): void {
        const socket = this.factory(this.url);
        this.socket = socket;
        socket.addEventListener("open", () => {
            this.connected = true;
            this.handlers.onStatus?.(true);
        });
        socket.addEventListener("close", () => {
            this.connected = false;
            this.handlers.onStatus?.(false);
        });
        socket.addEventListener("error", () => {
            this.connected = false;
            this.handlers.onStatus?.(false);
        });
        socket.addEventListener("message", (ev: { data: unknown }) => {
            const text = typeof ev.data === "string" ? ev.data : String(ev.data);
            const frame = decodeFrame(text);
            if (frame === null) {
                return;
            }
            if (frame.type === "render") {
                const payload = parseRenderPayload(frame);
                if (payload !== null) {
                    this.handlers.onRender(payload);
                }
            } else if (frame.type === "err") {
                this.handlers.onError?.(frame.body);
            }
            // hello_ack / ack frames are informational
        });
    }

    sendEvent(payload: Record<string, unknown>): boolean {
        if (this.socket === null || !this.connected) {
            return false;
        }
        this.socket.send(eventFrame(payload));
        return true;
    }

    close(): void {
        this.socket?.close();
    }
}

export function sessionUrl(host: string, port: number, name = "self"): string {
    return `ws://${host}:${port}/session?name=${encodeURIComponent(name)}`;
}
