import { ApiClient } from './api.js';
import { App } from './app.js';

// The operator token comes from the URL (?token=...) and is remembered
// for the session; without one the dashboard is a read-only observer
// view of the same audit.
const params = new URLSearchParams(window.location.search);
const fromUrl = params.get('token');
if (fromUrl) sessionStorage.setItem('operatorToken', fromUrl);
const token = sessionStorage.getItem('operatorToken');

const client = new ApiClient('', token);
new App(client, document).mount();
