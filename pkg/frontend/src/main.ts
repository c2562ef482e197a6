/** Browser bootstrap: one store, one stream, DOM glue. */

import { ApiClient, ApiError } from './api.js';
import { canonicalizePlate, validateEmbedding } from './plates.js';
import { SseClient } from './sse.js';
import { AckDismissError, AlertStore, transition } from './store.js';
import { alertListHtml, staleBannerHtml } from './view.js';

const EMBEDDING_DIM = 128;

const api = new ApiClient('');
const store = new AlertStore();
const stream = new SseClient('/api/events/stream');

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showMessage(text: string, isError = false): void {
  const box = el<HTMLElement>('messages');
  box.textContent = text;
  box.className = isError ? 'message error' : 'message';
}

function render(): void {
  el('banner').innerHTML = staleBannerHtml(store.connected);
  el('open-alerts').innerHTML = alertListHtml(store.sorted('open'), Date.now());
  el('acked-alerts').innerHTML = alertListHtml(store.sorted('acknowledged'), Date.now());
}

async function refreshWatchlists(): Promise<void> {
  const [plates, faces] = await Promise.all([api.listPlates(), api.listFaces()]);
  el('plate-list').innerHTML = plates
    .map((p) => `<li>${p.plate} <em>${p.label}</em> <small>${p.id}</small></li>`)
    .join('');
  el('face-list').innerHTML = faces
    .map((f) => `<li>${f.person_name} <small>links: ${f.linked_plates.join(', ') || '-'}</small></li>`)
    .join('');
}

async function handleAlertAction(event: Event): Promise<void> {
  const target = event.target as HTMLElement;
  const action = target.dataset.action;
  const alertId = Number(target.dataset.alert);
  if (!action || Number.isNaN(alertId)) return;
  try {
    await transition(store, api, alertId, action === 'ack' ? 'acknowledged' : 'dismissed');
  } catch (error) {
    const e = error as AckDismissError;
    showMessage(`alert ${e.alertId}: ${e.code} (${e.message})`, true);
  }
}

async function submitPlate(event: Event): Promise<void> {
  event.preventDefault();
  const input = el<HTMLInputElement>('plate-text');
  const label = el<HTMLInputElement>('plate-label');
  let canonical: string;
  try {
    canonical = canonicalizePlate(input.value);
  } catch (error) {
    showMessage((error as Error).message, true);
    return;
  }
  try {
    const entry = await api.addPlate(canonical, label.value);
    showMessage(`watching plate ${entry.plate}`);
    input.value = '';
    label.value = '';
    await refreshWatchlists();
  } catch (error) {
    const e = error as ApiError;
    showMessage(`server rejected plate: ${e.code} ${e.message}`, true);
  }
}

async function submitFace(event: Event): Promise<void> {
  event.preventDefault();
  const name = el<HTMLInputElement>('face-name').value.trim();
  const file = el<HTMLInputElement>('face-embedding').files?.[0];
  const linksRaw = el<HTMLInputElement>('face-links').value;
  if (!name || !file) {
    showMessage('person name and embedding file are required', true);
    return;
  }
  let embedding: number[];
  let links: string[];
  try {
    embedding = validateEmbedding(JSON.parse(await file.text()), EMBEDDING_DIM);
    links = linksRaw
      .split(',')
      .map((s) => s.trim())
      .filter(Boolean)
      .map(canonicalizePlate);
  } catch (error) {
    showMessage((error as Error).message, true);
    return;
  }
  try {
    const entry = await api.addFace(name, embedding, links);
    showMessage(`watching face ${entry.person_name}`);
    await refreshWatchlists();
  } catch (error) {
    const e = error as ApiError;
    showMessage(`server rejected face entry: ${e.code} ${e.message}`, true);
  }
}

export async function boot(): Promise<void> {
  store.subscribe(render);
  el('open-alerts').addEventListener('click', handleAlertAction);
  el('acked-alerts').addEventListener('click', handleAlertAction);
  el<HTMLFormElement>('plate-form').addEventListener('submit', submitPlate);
  el<HTMLFormElement>('face-form').addEventListener('submit', submitFace);

  stream.onEvent = (record) => store.applyEvent(record);
  stream.onStateChange = (connected) => store.setConnected(connected);

  store.applySnapshot(await api.listAlerts());
  await refreshWatchlists();
  void stream.start();
  store.setConnected(true);
  setInterval(render, 30_000); // keep relative times fresh
}

if (typeof document !== 'undefined') {
  void boot();
}
