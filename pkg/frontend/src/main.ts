import { bootstrap } from './app.js';

bootstrap(document);
