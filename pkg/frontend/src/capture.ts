// Webcam capture (browser only): grab frames from getUserMedia at a capped
// rate, downscale to the transmission limit, and hand raw images to the
// session.

import { downscaleToCap, rgbaToRgb, RawImage } from "./pnm.js";
import { MAX_FPS, UiSession } from "./session.js";

export interface CaptureOptions {
  fps?: number; // capped at MAX_FPS
  video?: MediaTrackConstraints;
}

export class Capture {
  private stream: MediaStream | null = null;
  private video: HTMLVideoElement | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;
  private startedAt = 0;

  constructor(private session: UiSession) {}

  async start(options: CaptureOptions = {}): Promise<void> {
    const fps = Math.min(options.fps ?? 10, MAX_FPS);
    this.stream = await navigator.mediaDevices.getUserMedia({
      video: options.video ?? { width: 320, height: 240 },
    });
    const video = document.createElement("video");
    video.srcObject = this.stream;
    await video.play();
    this.video = video;

    const canvas = document.createElement("canvas");
    const context = canvas.getContext("2d");
    if (!context) throw new Error("no 2d canvas context");

    this.startedAt = performance.now();
    this.timer = setInterval(() => {
      canvas.width = video.videoWidth;
      canvas.height = video.videoHeight;
      if (canvas.width === 0) return;
      context.drawImage(video, 0, 0);
      const rgba = context.getImageData(0, 0, canvas.width, canvas.height).data;
      const image: RawImage = downscaleToCap(rgbaToRgb(canvas.width, canvas.height, rgba));
      this.session.sendImage(image, Math.round(performance.now() - this.startedAt));
    }, 1000 / fps);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
    this.stream?.getTracks().forEach((track) => track.stop());
    this.stream = null;
    this.video = null;
  }
}
