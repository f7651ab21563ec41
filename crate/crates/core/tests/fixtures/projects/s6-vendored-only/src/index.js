import { v4 } from 'uuid';
